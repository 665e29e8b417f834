#include "ot/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ot {

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  return out;
}

double parse_double(const std::string& token, const std::string& path) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(ErrorCode::IoError,
                "malformed number '" + token + "' in " + path);
  }
  return v;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      row.push_back(parse_double(trim(token), path));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::IoError, "ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::IoError, path + " is empty");
  }
  return Matrix::from_rows(rows);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out = open_output(path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::vector<double> read_vector_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    values.push_back(parse_double(line, path));
  }
  if (values.empty()) {
    throw Error(ErrorCode::IoError, path + " is empty");
  }
  return values;
}

void write_vector_csv(const std::string& path,
                      const std::vector<double>& values) {
  std::ofstream out = open_output(path);
  for (double v : values) out << format_double(v) << '\n';
}

BipartiteGraph read_graph(const std::string& path) {
  std::ifstream in = open_input(path);
  long nl = -1, nr = -1;
  if (!(in >> nl >> nr) || nl < 0 || nr < 0) {
    throw Error(ErrorCode::IoError, "bad graph header in " + path);
  }
  BipartiteGraph g(static_cast<std::size_t>(nl), static_cast<std::size_t>(nr));
  long i, j;
  while (in >> i >> j) {
    if (i < 0 || i >= nl || j < 0 || j >= nr) {
      throw Error(ErrorCode::IoError,
                  "edge (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") out of range in " + path);
    }
    g.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return g;
}

void write_matching(const std::string& path, const Matching& m) {
  std::ofstream out = open_output(path);
  for (auto [i, j] : m.edges()) {
    out << i << ' ' << j << '\n';
  }
}

}  // namespace ot
