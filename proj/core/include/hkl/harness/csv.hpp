#pragma once

#include <string>

#include "hkl/types.hpp"

namespace hkl::harness {

/// Plain numeric CSV (comma, semicolon, tab or space separated). With
/// `header`, the first line is skipped.
Matrix read_matrix_csv(const std::string& path, bool header = false);
/// Single-column file; a one-row file is accepted as well.
Vector read_vector_csv(const std::string& path, bool header = false);

void write_matrix_csv(const std::string& path, const Matrix& m);
void write_vector_csv(const std::string& path, const Vector& v);

}  // namespace hkl::harness
