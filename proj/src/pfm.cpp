#include "lbvs/pfm.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace lbvs {

namespace {

bool host_is_little_endian() { return std::endian::native == std::endian::little; }

void byteswap_floats(std::vector<float>& data) {
    for (float& f : data) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        u = ((u & 0x000000FFu) << 24) | ((u & 0x0000FF00u) << 8) | ((u & 0x00FF0000u) >> 8) |
            ((u & 0xFF000000u) >> 24);
        std::memcpy(&f, &u, 4);
    }
}

/// PFM header tokens are separated by whitespace; '#' comments are tolerated.
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

void validate(const HdrFrame& frame) {
    if (frame.width < 1 || frame.height < 1)
        throw DataError("HdrFrame: dimensions must be >= 1");
    if (frame.rgb.size() != frame.pixel_count() * 3)
        throw DataError("HdrFrame: sample count does not match dimensions");
    for (float s : frame.rgb) {
        if (!std::isfinite(s)) throw DataError("HdrFrame: non-finite sample");
        if (s < 0.0f) throw DataError("HdrFrame: negative sample");
    }
    if (!(frame.luminance_scale > 0.0f))
        throw DataError("HdrFrame: luminance_scale must be > 0");
}

HdrFrame read_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_pfm: cannot open '" + path + "'");

    const std::string magic = next_token(in);
    bool color;
    if (magic == "PF")
        color = true;
    else if (magic == "Pf")
        color = false;
    else
        throw DataError("read_pfm: unrecognized header magic '" + magic + "' in '" + path + "'");

    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        scale = std::stod(next_token(in));
    } catch (const std::exception&) {
        throw DataError("read_pfm: malformed header in '" + path + "'");
    }
    if (width < 1 || height < 1)
        throw DataError("read_pfm: invalid dimensions in '" + path + "'");

    const bool file_little = scale < 0.0;
    const std::size_t n = static_cast<std::size_t>(width) * height * (color ? 3 : 1);
    std::vector<float> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 4));
    if (static_cast<std::size_t>(in.gcount()) != n * 4)
        throw DataError("read_pfm: truncated payload in '" + path + "' (expected " +
                        std::to_string(n) + " floats)");
    if (file_little != host_is_little_endian()) byteswap_floats(raw);

    HdrFrame frame;
    frame.width = width;
    frame.height = height;
    frame.luminance_scale = scale == 0.0 ? 1.0f : static_cast<float>(std::fabs(scale));
    frame.rgb.resize(frame.pixel_count() * 3);

    // PFM rows run bottom-to-top; flip into top-left origin.
    for (int y = 0; y < height; ++y) {
        const std::size_t src_row = static_cast<std::size_t>(height - 1 - y) * width;
        for (int x = 0; x < width; ++x) {
            float* dst = frame.pixel(x, y);
            if (color) {
                const float* src = &raw[(src_row + x) * 3];
                dst[0] = src[0];
                dst[1] = src[1];
                dst[2] = src[2];
            } else {
                const float g = raw[src_row + x];
                dst[0] = dst[1] = dst[2] = g;
            }
        }
    }
    validate(frame);
    return frame;
}

void write_pfm(const HdrFrame& frame, const std::string& path) {
    validate(frame);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_pfm: cannot open '" + path + "' for writing");
    char header[96];
    std::snprintf(header, sizeof(header), "PF\n%d %d\n%.9g\n", frame.width, frame.height,
                  -static_cast<double>(frame.luminance_scale));
    out << header;
    // Payload is always little endian (scale sign above says so).
    std::vector<float> row(static_cast<std::size_t>(frame.width) * 3);
    for (int y = frame.height - 1; y >= 0; --y) {
        std::memcpy(row.data(), frame.pixel(0, y), row.size() * 4);
        if (!host_is_little_endian()) byteswap_floats(row);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * 4));
    }
    if (!out) throw DataError("write_pfm: write failed for '" + path + "'");
}

}  // namespace lbvs
