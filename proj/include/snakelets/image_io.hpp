#pragma once

#include "raster.hpp"

#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace snakelets {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (!f.good() && !f.eof()) throw IoError("failed reading '" + path + "'");
    return bytes;
}

struct PngMemReader {
    const unsigned char* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* r = static_cast<PngMemReader*>(png_get_io_ptr(png));
    if (r->pos + n > r->size) {
        png_error(png, "unexpected end of PNG data");
        return;
    }
    std::memcpy(out, r->data + r->pos, n);
    r->pos += n;
}

inline RasterImage decode_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failure");
    }

    PngMemReader reader{bytes.data(), bytes.size(), 0};
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    std::string error;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("'" + path + "': " + (error.empty() ? "invalid or corrupt PNG" : error));
    }

    png_set_read_fn(png, &reader, png_mem_read);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("'" + path + "': 16-bit PNG not supported, 8-bit only");
    }

    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = png_get_channels(png, info);
    if (w <= 0 || h <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("'" + path + "': zero-dimension image");
    }
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("'" + path + "': unsupported channel layout");
    }

    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.assign(stride * h, 0);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + stride * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    RasterImage img(w, h, ch);
    for (int y = 0; y < h; ++y) {
        const png_byte* row = pixels.data() + stride * y;
        for (std::size_t i = 0; i < static_cast<std::size_t>(w) * ch; ++i)
            img.data[static_cast<std::size_t>(y) * w * ch + i] = row[i] / 255.0f;
    }
    return img;
}

// Binary PGM (P5) / PPM (P6), 8-bit depth only.
inline RasterImage decode_pnm(const std::vector<unsigned char>& bytes, const std::string& path) {
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> IoError { return IoError("'" + path + "': " + why); };

    auto next_token = [&]() -> std::string {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string tok;
        while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#')
            tok.push_back(static_cast<char>(bytes[pos++]));
        if (tok.empty()) throw fail("truncated header");
        return tok;
    };

    const std::string magic = next_token();
    int ch = 0;
    if (magic == "P5") ch = 1;
    else if (magic == "P6") ch = 3;
    else throw fail("unsupported format (binary P5/P6 expected)");

    long w = 0, h = 0, maxval = 0;
    try {
        w = std::stol(next_token());
        h = std::stol(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw fail("malformed header");
    }
    if (w <= 0 || h <= 0) throw fail("zero-dimension image");
    if (maxval <= 0) throw fail("invalid maxval");
    if (maxval > 255) throw fail("16-bit samples not supported, 8-bit only");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("malformed header");
    ++pos;  // single whitespace between maxval and raster data

    const std::size_t need = static_cast<std::size_t>(w) * h * ch;
    if (bytes.size() - pos < need) throw fail("truncated pixel data");

    RasterImage img(static_cast<int>(w), static_cast<int>(h), ch);
    const float scale = 1.0f / static_cast<float>(maxval);
    for (std::size_t i = 0; i < need; ++i)
        img.data[i] = std::min(1.0f, bytes[pos + i] * scale);
    return img;
}

inline std::uint8_t quantize(float v) {
    const float s = std::clamp(v, 0.0f, 1.0f) * 255.0f;
    return static_cast<std::uint8_t>(std::lround(s));
}

}  // namespace detail

// Loads a PNG or binary PGM/PPM image; 8-bit samples are divided by the
// declared maximum so the result lies in [0, 1].
inline RasterImage load_image(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0)
        return detail::decode_png(bytes, path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return detail::decode_pnm(bytes, path);
    throw IoError("'" + path + "': unsupported format (PNG or binary PGM/PPM expected)");
}

inline void save_png(const std::string& path, const RasterImage& img) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) {
        std::fclose(fp);
        throw IoError("png: allocation failure");
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        std::fclose(fp);
        throw IoError("png: allocation failure");
    }

    std::vector<png_byte> bytes(img.pixel_count() * img.channels);
    std::vector<png_bytep> rows(img.height);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("failed writing '" + path + "'");
    }

    png_init_io(png, fp);
    const int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.width, img.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = detail::quantize(img.data[i]);
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y) rows[y] = bytes.data() + stride * y;

    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fclose(fp) != 0) throw IoError("failed writing '" + path + "'");
}

inline void save_png(const std::string& path, const BinaryEdgeMap& map) {
    save_png(path, map.to_image());
}

inline void save_pgm(const std::string& path, const RasterImage& img) {
    if (img.channels != 1) throw std::invalid_argument("save_pgm: single-channel image required");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<char> bytes(img.pixel_count());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = static_cast<char>(detail::quantize(img.data[i]));
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

}  // namespace snakelets
