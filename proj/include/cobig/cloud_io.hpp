#pragma once

#include "cobig/surface.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cobig {

/// Malformed input file. The message carries "path:line: ".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct LoadedCloud {
    PointCloud cloud;
    std::size_t dropped = 0; ///< rows with a non-finite coordinate
};

/// Reads ASCII or binary little-endian PLY (vertex x, y, z; other properties
/// ignored) and delimited text (whitespace or comma separated, optional header
/// row naming x, y, z columns, '#' comments).
LoadedCloud load_cloud(const std::string& path);

/// Writes one "x y z" line per point at full precision.
void save_xyz(const std::string& path, const PointCloud& cloud);

} // namespace cobig
