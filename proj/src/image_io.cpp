#include "facerestore/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "facerestore/errors.hpp"

namespace facerestore {

namespace {

std::string lower_ext(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

ImageStack from_interleaved(const std::vector<std::uint8_t>& px, int w, int h, int ch) {
    std::vector<ImagePlane> planes(static_cast<std::size_t>(ch), ImagePlane(w, h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c)
                planes[static_cast<std::size_t>(c)](x, y) =
                    px[(static_cast<std::size_t>(y) * w + x) * ch + c] / 255.0;
    return ImageStack(std::move(planes), ch == 1 ? ColorSpace::Luma : ColorSpace::RGB);
}

std::vector<std::uint8_t> to_interleaved(const ImageStack& img) {
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channel_count();
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * ch);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c) {
                const double v = std::clamp(img.channel(c)(x, y), 0.0, 1.0);
                px[(static_cast<std::size_t>(y) * w + x) * ch + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    return px;
}

ImageStack load_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw DataError("cannot read PNG " + path.string() + ": " + image.message);
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DataError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return from_interleaved(px, static_cast<int>(image.width), static_cast<int>(image.height), color ? 3 : 1);
}

void save_png(const ImageStack& img, const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = img.channel_count() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const auto px = to_interleaved(img);
    if (!png_image_write_to_file(&image, path.c_str(), 0, px.data(), 0, nullptr))
        throw DataError("cannot write PNG " + path.string() + ": " + image.message);
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

ImageStack load_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string magic = pnm_token(in);
    if (magic != "P5" && magic != "P6") throw DataError(path.string() + ": only binary P5/P6 are supported");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pnm_token(in));
        h = std::stoi(pnm_token(in));
        maxval = std::stoi(pnm_token(in));
    } catch (const std::exception&) {
        throw DataError(path.string() + ": malformed header");
    }
    if (w <= 0 || h <= 0 || maxval != 255) throw DataError(path.string() + ": unsupported dimensions or maxval");
    const int ch = magic == "P5" ? 1 : 3;
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * ch);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size())) throw DataError(path.string() + ": truncated pixel data");
    return from_interleaved(px, w, h, ch);
}

void save_pnm(const ImageStack& img, const std::filesystem::path& path, int channels) {
    if (img.channel_count() != channels)
        throw std::invalid_argument(path.string() + ": channel count does not fit the file type");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << (channels == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = to_interleaved(img);
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace

ImageStack load_image(const std::filesystem::path& path) {
    const auto ext = lower_ext(path);
    if (ext == ".png") return load_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return load_pnm(path);
    throw DataError("unsupported image format: " + path.string());
}

void save_image(const ImageStack& img, const std::filesystem::path& path) {
    if (img.empty()) throw std::invalid_argument("save_image: empty image");
    if (img.channel_count() != 1 && img.channel_count() != 3)
        throw std::invalid_argument("save_image: only 1- or 3-channel images can be written");
    const auto ext = lower_ext(path);
    if (ext == ".png") return save_png(img, path);
    if (ext == ".pgm") return save_pnm(img, path, 1);
    if (ext == ".ppm") return save_pnm(img, path, 3);
    throw std::invalid_argument("unsupported output format: " + path.string());
}

void save_image(const ImagePlane& plane, const std::filesystem::path& path) {
    save_image(ImageStack::from_luma(plane), path);
}

}  // namespace facerestore
