#include "hkl/harness/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <vector>

#include "hkl/error.hpp"

namespace hkl::harness {

namespace {

bool is_separator(char c) { return c == ',' || c == ';' || c == '\t' || c == ' ' || c == '\r'; }

std::vector<double> parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
  std::vector<double> values;
  const char* s = line.c_str();
  while (*s != '\0') {
    while (*s != '\0' && is_separator(*s)) ++s;
    if (*s == '\0') break;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || errno == ERANGE)
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": not a number");
    values.push_back(v);
    s = end;
    if (*s != '\0' && !is_separator(*s))
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": malformed field");
  }
  return values;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    auto values = parse_line(line, path, line_no);
    if (values.empty()) continue;
    if (!rows.empty() && values.size() != rows.front().size())
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InvalidArgument(path + ": no data");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

Vector read_vector_csv(const std::string& path, bool header) {
  const Matrix m = read_matrix_csv(path, header);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InvalidArgument(path + ": expected a single column");
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error("cannot open " + path + " for writing");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) std::fprintf(f, c == 0 ? "%.17g" : ",%.17g", m(r, c));
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw Error("failed writing " + path);
}

void write_vector_csv(const std::string& path, const Vector& v) { write_matrix_csv(path, v); }

}  // namespace hkl::harness
