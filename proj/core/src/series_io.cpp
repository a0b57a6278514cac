#include "ssdeconv/series_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "ssdeconv/error.hpp"

namespace ssdeconv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ObservationSeries parse_series(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  std::vector<double> flat;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t);
    if (!have_header) {
      d = cells.size();
      for (std::size_t i = 0; i < d; ++i) {
        if (cells[i] != "y" + std::to_string(i + 1))
          throw DataError("line " + std::to_string(line_no) + ": header must be y1,..,yd");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != d) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || errno == ERANGE) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric cell '" + c + "'");
      }
      flat.push_back(v);
    }
  }
  if (!have_header) throw DataError("series CSV is empty (missing y1..yd header)");
  const auto n = static_cast<Eigen::Index>(flat.size() / d);
  if (n < ObservationSeries::kMinLength)
    throw DataError("series CSV has " + std::to_string(n) + " rows; at least 3 are required");
  Matrix m(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) m(i, j) = flat[i * d + j];
  return ObservationSeries(std::move(m));
}

ObservationSeries read_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_series(ss.str());
}

std::string format_matrix_csv(const Matrix& m, const std::string& column_prefix, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) {
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << '\n';
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << column_prefix << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
  return out.str();
}

void write_series(const std::filesystem::path& path, const Matrix& values, const std::string& comment) {
  write_file_atomic(path, format_matrix_csv(values, "y", comment));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw DataError("cannot move output into place at '" + path.string() + "': " + ec.message());
  }
}

}  // namespace ssdeconv
