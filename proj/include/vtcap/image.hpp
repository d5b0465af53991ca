#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <zlib.h>

#include "vtcap/error.hpp"
#include "vtcap/rng.hpp"

namespace vtcap::img {

/// 8-bit grayscale raster, row-major, white = 255.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, std::uint8_t fill = 255)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t* row(int y) { return pixels.data() + static_cast<std::size_t>(y) * width; }
    const std::uint8_t* row(int y) const {
        return pixels.data() + static_cast<std::size_t>(y) * width;
    }

    bool operator==(const Image& o) const {
        return width == o.width && height == o.height && pixels == o.pixels;
    }

    std::uint64_t checksum() const { return fnv1a64(pixels.data(), pixels.size()); }
};

/// Paste src into dst with its top-left corner at (x, y); pixels are copied
/// verbatim, never rescaled. Out-of-range placement is a caller bug.
inline void paste(Image& dst, const Image& src, int x, int y) {
    if (x < 0 || y < 0 || x + src.width > dst.width || y + src.height > dst.height)
        throw DataError("paste: source does not fit destination at requested offset");
    for (int row = 0; row < src.height; ++row)
        std::memcpy(dst.row(y + row) + x, src.row(row), static_cast<std::size_t>(src.width));
}

inline Image crop(const Image& src, int x, int y, int w, int h) {
    if (x < 0 || y < 0 || x + w > src.width || y + h > src.height)
        throw DataError("crop: region out of bounds");
    Image out(w, h);
    for (int row = 0; row < h; ++row)
        std::memcpy(out.row(row), src.row(y + row) + x, static_cast<std::size_t>(w));
    return out;
}

/// Bilinear resize with half-pixel-center sampling. Deterministic; this is
/// the filter recorded in sample metadata.
inline Image resize_bilinear(const Image& src, int w, int h) {
    if (w <= 0 || h <= 0) throw DataError("resize_bilinear: target size must be positive");
    if (src.width <= 0 || src.height <= 0) throw DataError("resize_bilinear: empty source");
    Image out(w, h);
    const double sx = static_cast<double>(src.width) / w;
    const double sy = static_cast<double>(src.height) / h;
    for (int y = 0; y < h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double wx = fx - x0;
            const double top = (1.0 - wx) * src.at(x0, y0) + wx * src.at(x1, y0);
            const double bot = (1.0 - wx) * src.at(x0, y1) + wx * src.at(x1, y1);
            const double v = (1.0 - wy) * top + wy * bot;
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PNG (grayscale 8-bit, zlib-compressed); the lossless default format.

namespace detail {

inline void put_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

inline std::uint32_t read_u32_be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                         const std::uint8_t* data, std::size_t len) {
    put_u32_be(out, static_cast<std::uint32_t>(len));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    if (len) out.insert(out.end(), data, data + len);
    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0, out.data() + start, static_cast<uInt>(4 + len)));
    put_u32_be(out, crc);
}

} // namespace detail

inline std::vector<std::uint8_t> encode_png(const Image& im) {
    if (im.width <= 0 || im.height <= 0) throw DataError("encode_png: empty image");
    std::vector<std::uint8_t> out{137, 80, 78, 71, 13, 10, 26, 10};

    std::uint8_t ihdr[13];
    ihdr[0] = static_cast<std::uint8_t>(im.width >> 24);
    ihdr[1] = static_cast<std::uint8_t>(im.width >> 16);
    ihdr[2] = static_cast<std::uint8_t>(im.width >> 8);
    ihdr[3] = static_cast<std::uint8_t>(im.width);
    ihdr[4] = static_cast<std::uint8_t>(im.height >> 24);
    ihdr[5] = static_cast<std::uint8_t>(im.height >> 16);
    ihdr[6] = static_cast<std::uint8_t>(im.height >> 8);
    ihdr[7] = static_cast<std::uint8_t>(im.height);
    ihdr[8] = 8;  // bit depth
    ihdr[9] = 0;  // grayscale
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    detail::append_chunk(out, "IHDR", ihdr, sizeof ihdr);

    // raw scanlines, filter byte 0 per row
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(im.height) * (im.width + 1));
    for (int y = 0; y < im.height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), im.row(y), im.row(y) + im.width);
    }
    uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> z(bound);
    if (::compress2(z.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw DataError("encode_png: deflate failed");
    detail::append_chunk(out, "IDAT", z.data(), bound);
    detail::append_chunk(out, "IEND", nullptr, 0);
    return out;
}

/// Decode PNGs produced by encode_png (8-bit grayscale, any standard row
/// filter). Color PNGs from other producers are rejected.
inline Image decode_png(const std::vector<std::uint8_t>& bytes) {
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw DataError("decode_png: not a PNG file");
    std::size_t pos = 8;
    int width = 0, height = 0;
    std::vector<std::uint8_t> idat;
    bool saw_ihdr = false;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = detail::read_u32_be(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) throw DataError("decode_png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* data = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw DataError("decode_png: bad IHDR");
            width = static_cast<int>(detail::read_u32_be(data));
            height = static_cast<int>(detail::read_u32_be(data + 4));
            if (data[8] != 8 || data[9] != 0)
                throw DataError("decode_png: only 8-bit grayscale supported");
            if (data[12] != 0) throw DataError("decode_png: interlacing not supported");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || width <= 0 || height <= 0) throw DataError("decode_png: missing IHDR");

    const std::size_t stride = static_cast<std::size_t>(width) + 1;
    std::vector<std::uint8_t> raw(stride * height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (::uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw DataError("decode_png: inflate failed");

    Image im(width, height);
    std::vector<std::uint8_t> prev(width, 0);
    for (int y = 0; y < height; ++y) {
        const std::uint8_t filter = raw[static_cast<std::size_t>(y) * stride];
        const std::uint8_t* src = &raw[static_cast<std::size_t>(y) * stride + 1];
        std::uint8_t* dst = im.row(y);
        for (int x = 0; x < width; ++x) {
            const int a = x > 0 ? dst[x - 1] : 0;
            const int b = prev[x];
            const int c = x > 0 ? prev[x - 1] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: {
                    const int p = a + b - c;
                    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    v += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
                    break;
                }
                default: throw DataError("decode_png: unknown filter type");
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xFF);
        }
        std::memcpy(prev.data(), dst, static_cast<std::size_t>(width));
    }
    return im;
}

inline void write_png(const Image& im, const std::string& path) {
    auto bytes = encode_png(im);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write: " + path);
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline Image read_png(const std::string& path) { return decode_png(read_file_bytes(path)); }

// ---------------------------------------------------------------------------
// JPEG export (optional lossy output; quality 95, 96 DPI by default)

inline void write_jpeg(const Image& im, const std::string& path, int quality = 95,
                       int dpi = 96) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open for writing: " + path);
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, f);
    cinfo.image_width = static_cast<JDIMENSION>(im.width);
    cinfo.image_height = static_cast<JDIMENSION>(im.height);
    cinfo.input_components = 1;
    cinfo.in_color_space = JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.density_unit = 1; // dots per inch
    cinfo.X_density = static_cast<UINT16>(dpi);
    cinfo.Y_density = static_cast<UINT16>(dpi);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<std::uint8_t*>(im.row(static_cast<int>(cinfo.next_scanline)));
        JSAMPROW rows[1] = {row};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(f);
}

} // namespace vtcap::img
