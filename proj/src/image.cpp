#include "facerestore/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace facerestore {

ImagePlane::ImagePlane(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("ImagePlane: negative dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

ImagePlane::ImagePlane(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) throw std::invalid_argument("ImagePlane: negative dimensions");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("ImagePlane: data length does not match dimensions");
}

ImageStack::ImageStack(std::vector<ImagePlane> channels, ColorSpace space)
    : channels_(std::move(channels)), space_(space) {
    if (channels_.empty()) throw std::invalid_argument("ImageStack: no channels");
    for (const auto& c : channels_) {
        if (!c.same_shape(channels_.front()))
            throw std::invalid_argument("ImageStack: channel dimensions differ");
    }
    if (space_ == ColorSpace::RGB && channels_.size() != 3)
        throw std::invalid_argument("ImageStack: RGB requires 3 channels");
    if (space_ == ColorSpace::Luma && channels_.size() != 1)
        throw std::invalid_argument("ImageStack: Luma requires 1 channel");
    if (space_ == ColorSpace::Mask) {
        for (const auto& c : channels_)
            for (double v : c.data())
                if (v != 0.0 && v != 1.0) throw std::invalid_argument("ImageStack: mask value not in {0,1}");
    }
}

ImageStack ImageStack::from_luma(ImagePlane plane) {
    std::vector<ImagePlane> ch;
    ch.push_back(std::move(plane));
    return ImageStack(std::move(ch), ColorSpace::Luma);
}

Kernel2D::Kernel2D(int size, std::vector<double> taps) : size_(size), taps_(std::move(taps)) {
    if (size <= 0 || size % 2 == 0) throw std::invalid_argument("Kernel2D: size must be odd and positive");
    if (taps_.size() != static_cast<std::size_t>(size) * size)
        throw std::invalid_argument("Kernel2D: tap count does not match size");
}

double Kernel2D::sum() const {
    double s = 0.0;
    for (double t : taps_) s += t;
    return s;
}

bool Kernel2D::is_normalized(double tol) const {
    for (double t : taps_)
        if (!(t >= 0.0)) return false;
    return std::abs(sum() - 1.0) <= tol;
}

double cubic_weight(double t, double a) {
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

namespace {

int scaled_extent(int n, Scale s) {
    // round(n * num / den), halves rounded up
    const long long v = (2LL * n * s.num + s.den) / (2LL * s.den);
    return static_cast<int>(v);
}

struct Taps {
    std::array<int, 4> index;
    std::array<double, 4> weight;
};

std::vector<Taps> resample_taps(int in_n, int out_n, Scale s) {
    std::vector<Taps> taps(static_cast<std::size_t>(out_n));
    for (int o = 0; o < out_n; ++o) {
        const double src = (o + 0.5) * s.den / s.num - 0.5;
        const double base = std::floor(src);
        const double frac = src - base;
        auto& t = taps[static_cast<std::size_t>(o)];
        for (int k = 0; k < 4; ++k) {
            const int idx = static_cast<int>(base) - 1 + k;
            t.index[k] = std::clamp(idx, 0, in_n - 1);
            t.weight[k] = cubic_weight(frac - (k - 1));
        }
    }
    return taps;
}

}  // namespace

ImagePlane bicubic_resize(const ImagePlane& img, Scale scale) {
    if (scale.num <= 0 || scale.den <= 0) throw std::invalid_argument("bicubic_resize: scale must be positive");
    if (img.empty()) throw std::invalid_argument("bicubic_resize: empty image");
    const int ow = scaled_extent(img.width(), scale);
    const int oh = scaled_extent(img.height(), scale);
    if (ow <= 0 || oh <= 0) throw std::invalid_argument("bicubic_resize: output would have zero size");
    if (scale.num == scale.den) return clamp01(img);

    const auto xt = resample_taps(img.width(), ow, scale);
    const auto yt = resample_taps(img.height(), oh, scale);

    ImagePlane horiz(ow, img.height());
    for (int y = 0; y < img.height(); ++y) {
        const auto src = img.row(y);
        auto dst = horiz.row(y);
        for (int x = 0; x < ow; ++x) {
            const auto& t = xt[static_cast<std::size_t>(x)];
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += t.weight[k] * src[static_cast<std::size_t>(t.index[k])];
            dst[static_cast<std::size_t>(x)] = acc;
        }
    }
    ImagePlane out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        const auto& t = yt[static_cast<std::size_t>(y)];
        auto dst = out.row(y);
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) acc += t.weight[k] * horiz(x, t.index[k]);
            dst[static_cast<std::size_t>(x)] = std::clamp(acc, 0.0, 1.0);
        }
    }
    return out;
}

ImageStack bicubic_resize(const ImageStack& img, Scale scale) {
    if (img.empty()) throw std::invalid_argument("bicubic_resize: empty image");
    if (img.color_space() == ColorSpace::Mask) throw std::invalid_argument("bicubic_resize: masks cannot be resampled");
    std::vector<ImagePlane> out;
    for (const auto& c : img.channels()) out.push_back(bicubic_resize(c, scale));
    return ImageStack(std::move(out), img.color_space());
}

ImagePlane convolve(const ImagePlane& img, const Kernel2D& kernel) {
    if (!kernel.is_normalized()) throw std::invalid_argument("convolve: kernel is not a normalized blur kernel");
    const int r = kernel.radius();
    const int w = img.width();
    const int h = img.height();
    ImagePlane out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < kernel.size(); ++ky) {
                const int sy = std::clamp(y - (ky - r), 0, h - 1);
                for (int kx = 0; kx < kernel.size(); ++kx) {
                    const int sx = std::clamp(x - (kx - r), 0, w - 1);
                    acc += kernel(kx, ky) * img(sx, sy);
                }
            }
            out(x, y) = acc;
        }
    }
    return out;
}

ImagePlane box_filter(const ImagePlane& img, int radius) {
    if (radius < 0) throw std::invalid_argument("box_filter: negative radius");
    if (radius == 0 || img.empty()) return img;
    const int w = img.width();
    const int h = img.height();
    // (w+1) x (h+1) summed-area table with a zero first row/column
    std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    auto at = [&](int x, int y) -> double& { return sat[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y) {
        double run = 0.0;
        for (int x = 0; x < w; ++x) {
            run += img(x, y);
            at(x + 1, y + 1) = at(x + 1, y) + run;
        }
    }
    ImagePlane out(w, h);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(h, y + radius + 1);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(w, x + radius + 1);
            const double s = at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
            out(x, y) = s / static_cast<double>((x1 - x0) * (y1 - y0));
        }
    }
    return out;
}

Patch extract_patch(const ImagePlane& img, PixelCoord center, int side) {
    if (side <= 0) throw std::invalid_argument("extract_patch: side must be positive");
    const int x0 = patch_origin(center.x, side);
    const int y0 = patch_origin(center.y, side);
    if (x0 < 0 || y0 < 0 || x0 + side > img.width() || y0 + side > img.height())
        throw std::out_of_range("extract_patch: window at (" + std::to_string(center.x) + "," +
                                std::to_string(center.y) + ") side " + std::to_string(side) +
                                " exceeds image bounds");
    Patch p{center, side, {}};
    p.values.reserve(static_cast<std::size_t>(side) * side);
    for (int y = y0; y < y0 + side; ++y) {
        const auto r = img.row(y);
        p.values.insert(p.values.end(), r.begin() + x0, r.begin() + x0 + side);
    }
    return p;
}

ImagePlane rgb_to_luma(const ImageStack& img) {
    if (img.color_space() == ColorSpace::Luma) return img.channel(0);
    if (img.color_space() != ColorSpace::RGB || img.channel_count() != 3)
        throw std::invalid_argument("rgb_to_luma: expected a 3-channel RGB stack");
    const auto& r = img.channel(0);
    const auto& g = img.channel(1);
    const auto& b = img.channel(2);
    ImagePlane out(img.width(), img.height());
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = 0.299 * r.data()[i] + 0.587 * g.data()[i] + 0.114 * b.data()[i];
    return out;
}

ImageStack luma_recombine(const ImagePlane& luma, const ImageStack& chroma_source) {
    if (chroma_source.color_space() == ColorSpace::Luma) {
        if (!luma.same_shape(chroma_source.channel(0)))
            throw std::invalid_argument("luma_recombine: dimension mismatch");
        return ImageStack::from_luma(clamp01(luma));
    }
    if (chroma_source.color_space() != ColorSpace::RGB || chroma_source.channel_count() != 3)
        throw std::invalid_argument("luma_recombine: chroma source must be RGB or Luma");
    if (!luma.same_shape(chroma_source.channel(0)))
        throw std::invalid_argument("luma_recombine: dimension mismatch");
    const ImagePlane old_luma = rgb_to_luma(chroma_source);
    std::vector<ImagePlane> out;
    for (const auto& c : chroma_source.channels()) {
        ImagePlane ch(c.width(), c.height());
        auto o = ch.data();
        for (std::size_t i = 0; i < o.size(); ++i)
            o[i] = std::clamp(c.data()[i] + (luma.data()[i] - old_luma.data()[i]), 0.0, 1.0);
        out.push_back(std::move(ch));
    }
    return ImageStack(std::move(out), ColorSpace::RGB);
}

ImagePlane clamp01(ImagePlane img) {
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

ImageStack clamp01(const ImageStack& img) {
    std::vector<ImagePlane> out;
    for (const auto& c : img.channels()) out.push_back(clamp01(c));
    return ImageStack(std::move(out), img.color_space());
}

ImageStack quantize_8bit(const ImageStack& img) {
    std::vector<ImagePlane> out;
    for (const auto& c : img.channels()) {
        ImagePlane q = c;
        for (double& v : q.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
        out.push_back(std::move(q));
    }
    return ImageStack(std::move(out), img.color_space());
}

}  // namespace facerestore
