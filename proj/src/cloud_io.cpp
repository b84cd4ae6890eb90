#include "cobig/cloud_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace cobig {

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::replace(cleaned.begin(), cleaned.end(), ';', ' ');
    std::istringstream in(cleaned);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

std::optional<double> to_number(const std::string& tok)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) {
            return std::nullopt;
        }
        return v;
    } catch (const std::out_of_range&) {
        // Overflowing literals become non-finite and are dropped later.
        return std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void push_point(LoadedCloud& out, double x, double y, double z)
{
    if (std::isfinite(x) && std::isfinite(y) && std::isfinite(z)) {
        out.cloud.points.emplace_back(x, y, z);
    } else {
        ++out.dropped;
    }
}

// --- PLY ------------------------------------------------------------------

enum class PlyType { Int8, Uint8, Int16, Uint16, Int32, Uint32, Float32, Float64 };

std::optional<PlyType> ply_type(const std::string& name)
{
    static const std::array<std::pair<const char*, PlyType>, 16> table{{
        {"char", PlyType::Int8},     {"int8", PlyType::Int8},
        {"uchar", PlyType::Uint8},   {"uint8", PlyType::Uint8},
        {"short", PlyType::Int16},   {"int16", PlyType::Int16},
        {"ushort", PlyType::Uint16}, {"uint16", PlyType::Uint16},
        {"int", PlyType::Int32},     {"int32", PlyType::Int32},
        {"uint", PlyType::Uint32},   {"uint32", PlyType::Uint32},
        {"float", PlyType::Float32}, {"float32", PlyType::Float32},
        {"double", PlyType::Float64}, {"float64", PlyType::Float64},
    }};
    for (const auto& [n, t] : table) {
        if (name == n) {
            return t;
        }
    }
    return std::nullopt;
}

std::size_t ply_size(PlyType t)
{
    switch (t) {
    case PlyType::Int8:
    case PlyType::Uint8:
        return 1;
    case PlyType::Int16:
    case PlyType::Uint16:
        return 2;
    case PlyType::Int32:
    case PlyType::Uint32:
    case PlyType::Float32:
        return 4;
    case PlyType::Float64:
        return 8;
    }
    return 0;
}

template <typename T>
T read_le(const unsigned char* p)
{
    std::array<unsigned char, sizeof(T)> buf;
    std::memcpy(buf.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf.begin(), buf.end());
    }
    T v;
    std::memcpy(&v, buf.data(), sizeof(T));
    return v;
}

double decode(PlyType t, const unsigned char* p)
{
    switch (t) {
    case PlyType::Int8:
        return read_le<std::int8_t>(p);
    case PlyType::Uint8:
        return read_le<std::uint8_t>(p);
    case PlyType::Int16:
        return read_le<std::int16_t>(p);
    case PlyType::Uint16:
        return read_le<std::uint16_t>(p);
    case PlyType::Int32:
        return read_le<std::int32_t>(p);
    case PlyType::Uint32:
        return read_le<std::uint32_t>(p);
    case PlyType::Float32:
        return read_le<float>(p);
    case PlyType::Float64:
        return read_le<double>(p);
    }
    return 0.0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

LoadedCloud load_ply(const std::string& path, std::ifstream& in)
{
    std::string line;
    std::size_t line_no = 1; // "ply" already consumed
    bool binary = false;
    bool have_format = false;
    std::vector<PlyElement> elements;

    for (;;) {
        if (!std::getline(in, line)) {
            throw ParseError(path, line_no, "unexpected end of PLY header");
        }
        ++line_no;
        const auto f = split_fields(trim(line));
        if (f.empty() || f[0] == "comment" || f[0] == "obj_info") {
            continue;
        }
        if (f[0] == "end_header") {
            break;
        }
        if (f[0] == "format") {
            if (f.size() < 2) {
                throw ParseError(path, line_no, "malformed format line");
            }
            if (f[1] == "ascii") {
                binary = false;
            } else if (f[1] == "binary_little_endian") {
                binary = true;
            } else {
                throw ParseError(path, line_no, "unsupported PLY format '" + f[1] + "'");
            }
            have_format = true;
        } else if (f[0] == "element") {
            if (f.size() != 3) {
                throw ParseError(path, line_no, "malformed element line");
            }
            const auto count = to_number(f[2]);
            if (!count || *count < 0 || std::floor(*count) != *count) {
                throw ParseError(path, line_no, "invalid element count '" + f[2] + "'");
            }
            elements.push_back({f[1], static_cast<std::size_t>(*count), {}});
        } else if (f[0] == "property") {
            if (elements.empty()) {
                throw ParseError(path, line_no, "property before any element");
            }
            PlyProperty prop;
            if (f.size() == 5 && f[1] == "list") {
                prop.is_list = true;
                prop.name = f[4];
            } else if (f.size() == 3) {
                const auto t = ply_type(f[1]);
                if (!t) {
                    throw ParseError(path, line_no, "unknown property type '" + f[1] + "'");
                }
                prop.type = *t;
                prop.name = f[2];
            } else {
                throw ParseError(path, line_no, "malformed property line");
            }
            elements.back().properties.push_back(prop);
        } else {
            throw ParseError(path, line_no, "unexpected header keyword '" + f[0] + "'");
        }
    }
    if (!have_format) {
        throw ParseError(path, line_no, "PLY header has no format line");
    }

    const auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                        [](const PlyElement& e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) {
        throw ParseError(path, line_no, "PLY header declares no vertex element");
    }
    std::array<int, 3> axis{-1, -1, -1};
    for (std::size_t p = 0; p < vertex_it->properties.size(); ++p) {
        const std::string& n = vertex_it->properties[p].name;
        const int slot = n == "x" ? 0 : n == "y" ? 1 : n == "z" ? 2 : -1;
        if (slot >= 0) {
            if (vertex_it->properties[p].is_list) {
                throw ParseError(path, line_no, "vertex coordinate declared as a list");
            }
            axis[slot] = static_cast<int>(p);
        }
    }
    if (std::find(axis.begin(), axis.end(), -1) != axis.end()) {
        throw ParseError(path, line_no, "vertex element lacks x, y or z");
    }

    LoadedCloud out;
    if (!binary) {
        // Skip rows of elements that precede the vertex element.
        std::size_t skip = 0;
        for (auto it = elements.begin(); it != vertex_it; ++it) {
            skip += it->count;
        }
        std::size_t seen = 0;
        while (seen < skip && std::getline(in, line)) {
            ++line_no;
            if (!trim(line).empty()) {
                ++seen;
            }
        }
        std::size_t read = 0;
        while (read < vertex_it->count) {
            if (!std::getline(in, line)) {
                throw ParseError(path, line_no, "file ends before all vertices were read");
            }
            ++line_no;
            const auto f = split_fields(trim(line));
            if (f.empty()) {
                continue;
            }
            if (f.size() < vertex_it->properties.size()) {
                throw ParseError(path, line_no, "vertex row has too few values");
            }
            std::array<double, 3> xyz{};
            for (int k = 0; k < 3; ++k) {
                const auto v = to_number(f[static_cast<std::size_t>(axis[k])]);
                if (!v) {
                    throw ParseError(path, line_no, "non-numeric vertex value");
                }
                xyz[k] = *v;
            }
            push_point(out, xyz[0], xyz[1], xyz[2]);
            ++read;
        }
        return out;
    }

    for (auto it = elements.begin(); it != vertex_it; ++it) {
        std::size_t stride = 0;
        for (const PlyProperty& p : it->properties) {
            if (p.is_list) {
                throw ParseError(path, line_no,
                                 "binary PLY with list properties before the vertex element");
            }
            stride += ply_size(p.type);
        }
        in.seekg(static_cast<std::streamoff>(stride * it->count), std::ios::cur);
    }
    std::vector<std::size_t> offset(vertex_it->properties.size());
    std::size_t stride = 0;
    for (std::size_t p = 0; p < vertex_it->properties.size(); ++p) {
        if (vertex_it->properties[p].is_list) {
            throw ParseError(path, line_no, "binary vertex element with list properties");
        }
        offset[p] = stride;
        stride += ply_size(vertex_it->properties[p].type);
    }
    std::vector<unsigned char> row(stride);
    for (std::size_t v = 0; v < vertex_it->count; ++v) {
        if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride))) {
            throw ParseError(path, line_no, "binary payload ends after " + std::to_string(v) +
                                                " of " + std::to_string(vertex_it->count) +
                                                " vertices");
        }
        std::array<double, 3> xyz{};
        for (int k = 0; k < 3; ++k) {
            const auto p = static_cast<std::size_t>(axis[k]);
            xyz[k] = decode(vertex_it->properties[p].type, row.data() + offset[p]);
        }
        push_point(out, xyz[0], xyz[1], xyz[2]);
    }
    return out;
}

// --- delimited text -----------------------------------------------------------

LoadedCloud load_text(const std::string& path, std::ifstream& in)
{
    LoadedCloud out;
    std::array<std::size_t, 3> col{0, 1, 2};
    bool first_row = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto f = split_fields(t);
        std::vector<std::optional<double>> values;
        values.reserve(f.size());
        bool numeric = true;
        for (const auto& tok : f) {
            values.push_back(to_number(tok));
            numeric = numeric && values.back().has_value();
        }
        if (!numeric) {
            if (!first_row) {
                throw ParseError(path, line_no, "non-numeric value in data row");
            }
            // Header row: locate the coordinate columns by name.
            std::array<bool, 3> found{};
            for (std::size_t c = 0; c < f.size(); ++c) {
                std::string name = lower(f[c]);
                if (const auto dot = name.rfind('.'); dot != std::string::npos) {
                    name = name.substr(dot + 1);
                }
                const int slot = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : -1;
                if (slot >= 0 && !found[slot]) {
                    col[slot] = c;
                    found[slot] = true;
                }
            }
            if (!found[0] || !found[1] || !found[2]) {
                throw ParseError(path, line_no, "unparseable header: no x, y, z columns");
            }
            first_row = false;
            continue;
        }
        first_row = false;
        const std::size_t need = *std::max_element(col.begin(), col.end()) + 1;
        if (f.size() < need) {
            throw ParseError(path, line_no,
                             "expected at least " + std::to_string(need) + " columns");
        }
        push_point(out, *values[col[0]], *values[col[1]], *values[col[2]]);
    }
    return out;
}

} // namespace

LoadedCloud load_cloud(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open point cloud file: " + path);
    }
    std::string first;
    std::getline(in, first);
    LoadedCloud out;
    if (trim(first) == "ply") {
        out = load_ply(path, in);
    } else {
        in.clear();
        in.seekg(0);
        out = load_text(path, in);
    }
    if (out.cloud.empty()) {
        throw std::runtime_error("no valid points in " + path);
    }
    return out;
}

void save_xyz(const std::string& path, const PointCloud& cloud)
{
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (f == nullptr) {
        throw std::runtime_error("cannot write point cloud file: " + path);
    }
    for (const Vec3& p : cloud.points) {
        std::fprintf(f, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    }
    if (std::fclose(f) != 0) {
        throw std::runtime_error("error writing point cloud file: " + path);
    }
}

} // namespace cobig
