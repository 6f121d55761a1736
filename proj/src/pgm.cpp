#include "lbvs/pgm.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>

namespace lbvs {

namespace {

std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
}

}  // namespace

void write_map(const Field2D& map, const std::string& path) {
    if (!field_all_finite(map)) throw DataError("write_map: non-finite value");
    if (field_min(map) < 0.0 || field_max(map) > 1.0)
        throw DataError("write_map: map must be normalized to [0,1]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_map: cannot open '" + path + "' for writing");
    out << "P5\n" << map.width << " " << map.height << "\n65535\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(map.width) * 2);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const auto q = static_cast<std::uint16_t>(std::lround(65535.0 * map.at(x, y)));
            row[2 * x] = static_cast<std::uint8_t>(q >> 8);
            row[2 * x + 1] = static_cast<std::uint8_t>(q & 0xFF);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw DataError("write_map: write failed for '" + path + "'");
}

Field2D read_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_map: cannot open '" + path + "'");
    if (next_token(in) != "P5") throw DataError("read_map: not a binary PGM: '" + path + "'");
    int width = 0, height = 0;
    long maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stol(next_token(in));
    } catch (const std::exception&) {
        throw DataError("read_map: malformed header in '" + path + "'");
    }
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw DataError("read_map: invalid header in '" + path + "'");
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw DataError("read_map: truncated payload in '" + path + "'");
    Field2D map(width, height);
    const double inv = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < map.size(); ++i) {
        const unsigned value = bytes == 2 ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1]
                                          : raw[i];
        map.v[i] = value * inv;
    }
    return map;
}

}  // namespace lbvs
