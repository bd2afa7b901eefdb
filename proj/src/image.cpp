#include "cgtrace/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include "cgtrace/errors.hpp"

namespace cgtrace {

Image::Image(int h, int w, int c, double fill) : height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3))
        throw InputError("image extents must be positive, channels 1 or 3");
    pixels.assign(static_cast<size_t>(h) * w * c, fill);
}

void Image::clamp01() {
    for (auto& v : pixels) v = std::min(1.0, std::max(0.0, v));
}

Image to_gray(const Image& img) {
    if (img.channels == 1) return img;
    Image out(img.height, img.width, 1);
    out.provenance = img.provenance;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x, 0) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                              0.114 * img.at(y, x, 2);
    return out;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

Image from_bytes(const std::vector<unsigned char>& bytes, int h, int w, int c) {
    Image img(h, w, c);
    for (size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i] / 255.0;
    return img;
}

std::vector<unsigned char> to_bytes(const Image& img) {
    std::vector<unsigned char> bytes(img.pixels.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, img.pixels[i]));
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    return bytes;
}

// ---- PPM / PGM (binary P5/P6) ----------------------------------------

int read_pnm_token(std::FILE* f) {
    int c = std::fgetc(f);
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#')
            while (c != EOF && c != '\n') c = std::fgetc(f);
        c = std::fgetc(f);
    }
    if (c == EOF) throw IoError("truncated PNM header");
    int val = 0;
    while (c != EOF && std::isdigit(c)) {
        val = val * 10 + (c - '0');
        c = std::fgetc(f);
    }
    return val;
}

Image load_pnm(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);
    char magic[3] = {0, 0, 0};
    if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' ||
        (magic[1] != '5' && magic[1] != '6'))
        throw IoError("unsupported PNM magic in " + path);
    const int channels = magic[1] == '6' ? 3 : 1;
    const int w = read_pnm_token(f.get());
    const int h = read_pnm_token(f.get());
    const int maxval = read_pnm_token(f.get());
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw IoError("unsupported PNM header in " + path);
    std::vector<unsigned char> bytes(static_cast<size_t>(h) * w * channels);
    if (std::fread(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
        throw IoError("truncated PNM payload in " + path);
    Image img(h, w, channels);
    for (size_t i = 0; i < bytes.size(); ++i)
        img.pixels[i] = static_cast<double>(bytes[i]) / maxval;
    return img;
}

void save_pnm(const Image& img, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot write " + path);
    std::fprintf(f.get(), "P%c\n%d %d\n255\n", img.channels == 3 ? '6' : '5',
                 img.width, img.height);
    const auto bytes = to_bytes(img);
    if (std::fwrite(bytes.data(), 1, bytes.size(), f.get()) != bytes.size())
        throw IoError("short write to " + path);
}

// ---- PNG ---------------------------------------------------------------

Image load_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int channels = static_cast<int>(png_get_channels(png, info));
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel count in " + path);
    }
    std::vector<unsigned char> bytes(static_cast<size_t>(h) * w * channels);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = bytes.data() + static_cast<size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(bytes, h, w, channels);
}

void save_png(const Image& img, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto bytes = to_bytes(img);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(bytes.data() +
                                        static_cast<size_t>(y) * img.width * img.channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- JPEG (decode only; encoding goes through the PNG/PPM writers) -----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

Image load_jpeg(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open " + path);
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("failed to decode JPEG " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);
    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    const int channels = cinfo.output_components;
    if (channels != 1 && channels != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("unsupported JPEG channel count in " + path);
    }
    std::vector<unsigned char> bytes(static_cast<size_t>(h) * w * channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        unsigned char* row = bytes.data() +
                             static_cast<size_t>(cinfo.output_scanline) * w * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_bytes(bytes, h, w, channels);
}

}  // namespace

Image load_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    Image img;
    if (ext == "png")
        img = load_png(path);
    else if (ext == "jpg" || ext == "jpeg")
        img = load_jpeg(path);
    else if (ext == "ppm" || ext == "pgm")
        img = load_pnm(path);
    else
        throw IoError("unsupported image format: " + path);
    img.provenance = Provenance::loaded;
    return img;
}

void save_image(const Image& img, const std::string& path) {
    if (img.empty()) throw InputError("cannot save an empty image");
    const std::string ext = lower_ext(path);
    if (ext == "png")
        save_png(img, path);
    else if (ext == "ppm" || ext == "pgm")
        save_pnm(img, path);
    else
        throw IoError("unsupported output format: " + path);
}

}  // namespace cgtrace
