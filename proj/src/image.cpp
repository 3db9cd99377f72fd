#include "stt/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

#include <png.h>

namespace stt {

std::pair<GrayImage, GrayImage> split_stereo_frame(const GrayImage& img) {
    const int w = img.width();
    if (w % 2 != 0) throw MalformedFrame("split_stereo_frame: odd frame width");
    const int half = w / 2;
    GrayImage left, right;
    left.data = img.data.leftCols(half);
    right.data = img.data.rightCols(half);
    return {std::move(left), std::move(right)};
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

Eigen::MatrixXd read_png_matrix(const std::string& path, int requested_depth) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open PNG: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw IoError("png_create_read_struct failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(r.png))) throw IoError("PNG decode error: " + path);

    png_init_io(r.png, fp.get());
    png_read_info(r.png, r.info);

    const int width = png_get_image_width(r.png, r.info);
    const int height = png_get_image_height(r.png, r.info);
    int depth = png_get_bit_depth(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(r.png, 1, -1.0, -1.0);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    if (depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (requested_depth == 16 && depth != 16)
        throw IoError("expected 16-bit PNG: " + path);
    if (requested_depth == 8 && depth == 16) png_set_strip_16(r.png);
#if defined(PNG_READ_SWAP_SUPPORTED)
    if (requested_depth == 16) png_set_swap(r.png);
#endif
    png_read_update_info(r.png, r.info);
    depth = png_get_bit_depth(r.png, r.info);

    Eigen::MatrixXd out(height, width);
    if (depth == 16) {
        std::vector<png_uint_16> row(width);
        for (int v = 0; v < height; ++v) {
            png_read_row(r.png, reinterpret_cast<png_bytep>(row.data()), nullptr);
            for (int u = 0; u < width; ++u) out(v, u) = static_cast<double>(row[u]);
        }
    } else {
        std::vector<png_byte> row(width);
        for (int v = 0; v < height; ++v) {
            png_read_row(r.png, row.data(), nullptr);
            for (int u = 0; u < width; ++u) out(v, u) = row[u] / 255.0;
        }
    }
    png_read_end(r.png, nullptr);
    return out;
}

void write_png_matrix(const Eigen::MatrixXd& m, const std::string& path, int depth) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write PNG: " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw IoError("png_create_write_struct failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw IoError("png_create_info_struct failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError("PNG encode error: " + path);

    const int width = static_cast<int>(m.cols());
    const int height = static_cast<int>(m.rows());
    png_init_io(w.png, fp.get());
    png_set_IHDR(w.png, w.info, width, height, depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
#if defined(PNG_WRITE_SWAP_SUPPORTED)
    if (depth == 16) png_set_swap(w.png);
#endif

    if (depth == 16) {
        std::vector<png_uint_16> row(width);
        for (int v = 0; v < height; ++v) {
            for (int u = 0; u < width; ++u) {
                double x = std::clamp(m(v, u), 0.0, 65535.0);
                row[u] = static_cast<png_uint_16>(std::lround(x));
            }
            png_write_row(w.png, reinterpret_cast<png_bytep>(row.data()));
        }
    } else {
        std::vector<png_byte> row(width);
        for (int v = 0; v < height; ++v) {
            for (int u = 0; u < width; ++u) {
                double x = std::clamp(m(v, u), 0.0, 1.0);
                row[u] = static_cast<png_byte>(std::lround(x * 255.0));
            }
            png_write_row(w.png, row.data());
        }
    }
    png_write_end(w.png, nullptr);
}

} // namespace

GrayImage load_png_gray(const std::string& path) {
    GrayImage img;
    img.data = read_png_matrix(path, 8);
    return img;
}

Eigen::MatrixXd load_png_gray16(const std::string& path) { return read_png_matrix(path, 16); }

void save_png_gray8(const GrayImage& img, const std::string& path) {
    write_png_matrix(img.data, path, 8);
}

void save_png_gray16(const Eigen::MatrixXd& values, const std::string& path) {
    write_png_matrix(values, path, 16);
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PGM: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw IoError("unsupported PGM magic in " + path);

    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("truncated PGM header: " + path);
    };
    const int width = std::stoi(next_token());
    const int height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
        throw IoError("bad PGM header: " + path);

    GrayImage img(width, height);
    if (magic == "P2") {
        for (int v = 0; v < height; ++v)
            for (int u = 0; u < width; ++u) {
                int x;
                if (!(in >> x)) throw IoError("truncated PGM data: " + path);
                img.at(u, v) = static_cast<double>(x) / maxval;
            }
        return img;
    }
    in.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(static_cast<size_t>(width) * bytes);
    for (int v = 0; v < height; ++v) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw IoError("truncated PGM data: " + path);
        for (int u = 0; u < width; ++u) {
            int x = bytes == 2 ? (row[2 * u] << 8) | row[2 * u + 1] : row[u];
            img.at(u, v) = static_cast<double>(x) / maxval;
        }
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write PGM: " + path);
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> row(img.width());
    for (int v = 0; v < img.height(); ++v) {
        for (int u = 0; u < img.width(); ++u) {
            double x = std::clamp(img.at(u, v), 0.0, 1.0);
            row[u] = static_cast<unsigned char>(std::lround(x * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
}

GrayImage load_image(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".png") return load_png_gray(path);
    if (ext == ".pgm") return load_pgm(path);
    throw IoError("unsupported image extension: " + path);
}

} // namespace stt
