#pragma once

#include <string>

#include "ot/core.hpp"
#include "ot/matching_types.hpp"

namespace ot {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Cost/plan files: row-major, comma-separated, no header.
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

// Marginal files: one value per line.
std::vector<double> read_vector_csv(const std::string& path);
void write_vector_csv(const std::string& path,
                      const std::vector<double>& values);

// Graph files: header "n_left n_right", then one "i j" pair per line,
// 0-indexed.
BipartiteGraph read_graph(const std::string& path);
void write_matching(const std::string& path, const Matching& m);

}  // namespace ot
