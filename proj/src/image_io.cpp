#include "fer/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace fer {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& why) {
    fail(ErrorKind::Io, "cannot read image '" + path + "': " + why);
}

// Skips whitespace and '#' comments in a PNM header.
int read_header_int(std::istream& in, const std::string& path) {
    int c = in.peek();
    while (in && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else {
            in.get();
        }
        c = in.peek();
    }
    int v = -1;
    if (!(in >> v) || v < 0) io_fail(path, "malformed PGM header");
    return v;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "file not found or unreadable");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') io_fail(path, "not a binary PGM (P5)");
    const int width = read_header_int(in, path);
    const int height = read_header_int(in, path);
    const int maxval = read_header_int(in, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) io_fail(path, "invalid PGM dimensions");
    in.get();  // single whitespace before the raster

    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) io_fail(path, "truncated PGM raster");

    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
        data[i] = std::min(1.0, static_cast<double>(v) / maxval);
    }
    return GrayImage(width, height, std::move(data));
}

GrayImage read_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) io_fail(path, "file not found or unreadable");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) io_fail(path, "not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) io_fail(path, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        io_fail(path, "libpng initialisation failed");
    }
    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        io_fail(path, "corrupt PNG data");
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int channels = png_get_channels(png, info);

    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (int y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels == 1) {
        std::vector<std::uint8_t> levels(static_cast<std::size_t>(width) * height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) levels[static_cast<std::size_t>(y) * width + x] = rows[y][x];
        return GrayImage::from_levels(width, height, levels);
    }
    if (channels != 3) io_fail(path, "unsupported PNG channel layout");
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y)
        std::copy(rows[y], rows[y] + 3 * width, rgb.begin() + static_cast<std::ptrdiff_t>(y) * width * 3);
    return luminance(rgb, width, height);
}

GrayImage read_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_fail(path, "file not found or unreadable");
    unsigned char head[8] = {0};
    in.read(reinterpret_cast<char*>(head), 8);
    if (in.gcount() >= 2 && head[0] == 'P' && head[1] == '5') return read_pgm(path);
    if (in.gcount() == 8 && png_sig_cmp(head, 0, 8) == 0) return read_png(path);
    io_fail(path, "unrecognised image format (expected PNG or binary PGM)");
}

void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<char> raster(img.size());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            raster[static_cast<std::size_t>(y) * img.width() + x] = static_cast<char>(img.level(x, y));
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) fail(ErrorKind::Io, "short write to '" + path + "'");
}

}  // namespace fer
