#pragma once

// Dense CSV matrices and small line-oriented files.

#include "tlnet/netmodel.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tlnet {

/// Malformed or missing input data. Messages carry the file and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row per line, comma-separated, 6 significant digits.
void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

Matrix read_matrix_csv(std::istream& in, const std::string& source = "<stream>");
Matrix read_matrix_csv(const std::filesystem::path& path);

ProbMatrix read_prob_matrix(const std::filesystem::path& path);
AdjMatrix read_adjacency(const std::filesystem::path& path);

/// One zero-based node index per line.
void write_index_list(const std::filesystem::path& path, const std::vector<Index>& indices);
std::vector<Index> read_index_list(const std::filesystem::path& path);

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

}  // namespace tlnet
