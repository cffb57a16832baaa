#include "maneuver/image.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "maneuver/errors.hpp"

namespace maneuver {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MapLoadError("cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

// --- PGM (P5, 8-bit) ---

// Skips whitespace and '#' comments, then parses a decimal token.
int pgm_token(const std::vector<uint8_t>& data, size_t& pos, const std::string& path) {
    while (pos < data.size()) {
        if (std::isspace(data[pos])) {
            ++pos;
        } else if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    int value = 0;
    bool any = false;
    while (pos < data.size() && std::isdigit(data[pos])) {
        value = value * 10 + (data[pos] - '0');
        any = true;
        ++pos;
    }
    if (!any) throw MapLoadError("malformed PGM header in " + path);
    return value;
}

GrayImage load_pgm(const std::vector<uint8_t>& data, const std::string& path) {
    size_t pos = 2;
    GrayImage img;
    img.width = pgm_token(data, pos, path);
    img.height = pgm_token(data, pos, path);
    const int maxval = pgm_token(data, pos, path);
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255) {
        throw MapLoadError("unsupported PGM dimensions/maxval in " + path);
    }
    ++pos;  // single whitespace byte after maxval
    const size_t need = static_cast<size_t>(img.width) * img.height;
    if (data.size() < pos + need) throw MapLoadError("truncated PGM data in " + path);
    img.pixels.assign(data.begin() + pos, data.begin() + pos + need);
    return img;
}

// --- PNG ---

constexpr uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

uint32_t be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

std::vector<uint8_t> zlib_inflate(const std::vector<uint8_t>& in, size_t expected,
                                  const std::string& path) {
    std::vector<uint8_t> out(expected);
    uLongf out_len = out.size();
    const int rc = uncompress(out.data(), &out_len, in.data(), in.size());
    if (rc != Z_OK || out_len != expected) {
        throw MapLoadError("PNG inflate failed for " + path);
    }
    return out;
}

std::vector<uint8_t> zlib_deflate(const std::vector<uint8_t>& in) {
    uLongf bound = compressBound(in.size());
    std::vector<uint8_t> out(bound);
    const int rc = compress2(out.data(), &bound, in.data(), in.size(), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw MapLoadError("PNG deflate failed");
    out.resize(bound);
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a);
    const int pb = std::abs(p - b);
    const int pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

GrayImage load_png(const std::vector<uint8_t>& data, const std::string& path) {
    if (data.size() < 8 || std::memcmp(data.data(), kPngSig, 8) != 0) {
        throw MapLoadError("bad PNG signature in " + path);
    }
    size_t pos = 8;
    int width = 0, height = 0, bit_depth = 0, color_type = 0;
    std::vector<uint8_t> idat;
    bool saw_ihdr = false, saw_iend = false;
    while (pos + 8 <= data.size() && !saw_iend) {
        const uint32_t len = be32(&data[pos]);
        if (pos + 12 + len > data.size()) throw MapLoadError("truncated PNG chunk in " + path);
        const char* type = reinterpret_cast<const char*>(&data[pos + 4]);
        const uint8_t* payload = &data[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw MapLoadError("bad IHDR in " + path);
            width = int(be32(payload));
            height = int(be32(payload + 4));
            bit_depth = payload[8];
            color_type = payload[9];
            if (payload[12] != 0) throw MapLoadError("interlaced PNG unsupported: " + path);
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
        }
        pos += 12 + len;  // length + type + payload + crc
    }
    if (!saw_ihdr || idat.empty()) throw MapLoadError("PNG missing IHDR/IDAT in " + path);
    if (bit_depth != 8 || (color_type != 0 && color_type != 2)) {
        throw MapLoadError("unsupported PNG format (need 8-bit gray or RGB): " + path);
    }
    if (width <= 0 || height <= 0) throw MapLoadError("bad PNG dimensions in " + path);

    const int channels = color_type == 0 ? 1 : 3;
    const size_t stride = size_t(width) * channels;
    const std::vector<uint8_t> raw =
        zlib_inflate(idat, (stride + 1) * size_t(height), path);

    std::vector<uint8_t> flat(stride * size_t(height));
    std::vector<uint8_t> prev(stride, 0);
    for (int y = 0; y < height; ++y) {
        const uint8_t filter = raw[(stride + 1) * y];
        const uint8_t* src = &raw[(stride + 1) * y + 1];
        uint8_t* dst = &flat[stride * y];
        for (size_t i = 0; i < stride; ++i) {
            const int left = i >= size_t(channels) ? dst[i - channels] : 0;
            const int up = prev[i];
            const int ul = i >= size_t(channels) ? prev[i - channels] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += up; break;
                case 3: v += (left + up) / 2; break;
                case 4: v += paeth(left, up, ul); break;
                default: throw MapLoadError("bad PNG filter type in " + path);
            }
            dst[i] = uint8_t(v);
        }
        std::memcpy(prev.data(), dst, stride);
    }

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(size_t(width) * height);
    if (channels == 1) {
        img.pixels = std::move(flat);
    } else {
        for (size_t i = 0; i < img.pixels.size(); ++i) {
            const int r = flat[3 * i], g = flat[3 * i + 1], b = flat[3 * i + 2];
            img.pixels[i] = uint8_t((r + g + b + 1) / 3);
        }
    }
    return img;
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> buf;
    put_be32(buf, uint32_t(payload.size()));
    buf.insert(buf.end(), type, type + 4);
    buf.insert(buf.end(), payload.begin(), payload.end());
    const uint32_t crc =
        crc32(0, buf.data() + 4, uInt(buf.size() - 4));  // type + payload
    put_be32(buf, crc);
    out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

void save_png_impl(const std::string& path, int width, int height, int channels,
                   const std::vector<uint8_t>& pixels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MapLoadError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(kPngSig), 8);

    std::vector<uint8_t> ihdr;
    put_be32(ihdr, uint32_t(width));
    put_be32(ihdr, uint32_t(height));
    ihdr.push_back(8);                                // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);            // gray / RGB
    ihdr.push_back(0);                                // compression
    ihdr.push_back(0);                                // filter method
    ihdr.push_back(0);                                // no interlace
    write_chunk(out, "IHDR", ihdr);

    const size_t stride = size_t(width) * channels;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * size_t(height));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);  // filter type: none
        raw.insert(raw.end(), pixels.begin() + stride * y, pixels.begin() + stride * (y + 1));
    }
    write_chunk(out, "IDAT", zlib_deflate(raw));
    write_chunk(out, "IEND", {});
    if (!out) throw MapLoadError("write failed for " + path);
}

}  // namespace

void RgbImage::fill(uint8_t r, uint8_t g, uint8_t b) {
    pixels.resize(size_t(width) * height * 3);
    for (size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = r;
        pixels[i + 1] = g;
        pixels[i + 2] = b;
    }
}

void RgbImage::set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const size_t i = (size_t(y) * width + x) * 3;
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
}

GrayImage load_image(const std::string& path) {
    const std::vector<uint8_t> data = read_file(path);
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '5') return load_pgm(data, path);
    if (data.size() >= 8 && std::memcmp(data.data(), kPngSig, 8) == 0) {
        return load_png(data, path);
    }
    throw MapLoadError("unrecognized image format: " + path);
}

void save_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MapLoadError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              std::streamsize(img.pixels.size()));
    if (!out) throw MapLoadError("write failed for " + path);
}

void save_png(const std::string& path, const GrayImage& img) {
    save_png_impl(path, img.width, img.height, 1, img.pixels);
}

void save_png(const std::string& path, const RgbImage& img) {
    save_png_impl(path, img.width, img.height, 3, img.pixels);
}

}  // namespace maneuver
