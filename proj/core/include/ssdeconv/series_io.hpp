#pragma once

#include <filesystem>
#include <string>

#include "ssdeconv/linalg.hpp"
#include "ssdeconv/model.hpp"

namespace ssdeconv {

/// Parses "y1,..,yd" CSV. Lines starting with '#' are comments. Throws
/// DataError naming the line for ragged rows or non-numeric cells, and for
/// fewer than 3 rows.
ObservationSeries read_series(const std::filesystem::path& path);
ObservationSeries parse_series(const std::string& text);

/// 17 significant digits, lossless round trip. `comment` lines get a "# " prefix.
std::string format_matrix_csv(const Matrix& m, const std::string& column_prefix, const std::string& comment = {});
void write_series(const std::filesystem::path& path, const Matrix& values, const std::string& comment = {});

/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string format_double(double v);

}  // namespace ssdeconv
