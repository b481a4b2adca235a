#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace facerestore {

/// Single-channel raster, row-major, intensities nominally in [0,1].
/// Values are stored in double so that filter chains stay within the
/// tolerances the oracle tests demand.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int width, int height, double fill = 0.0);
    ImagePlane(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(int x, int y) const { return data_[index(x, y)]; }
    double& operator()(int x, int y) { return data_[index(x, y)]; }

    std::span<const double> row(int y) const {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<double> row(int y) {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    bool same_shape(const ImagePlane& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

enum class ColorSpace { RGB, Luma, Mask };

/// Equal-sized channels plus a color tag. Mask stacks hold only 0/1 values.
class ImageStack {
public:
    ImageStack() = default;
    ImageStack(std::vector<ImagePlane> channels, ColorSpace space);

    static ImageStack from_luma(ImagePlane plane);

    int width() const noexcept { return channels_.empty() ? 0 : channels_.front().width(); }
    int height() const noexcept { return channels_.empty() ? 0 : channels_.front().height(); }
    int channel_count() const noexcept { return static_cast<int>(channels_.size()); }
    bool empty() const noexcept { return channels_.empty() || channels_.front().empty(); }
    ColorSpace color_space() const noexcept { return space_; }

    const ImagePlane& channel(int i) const { return channels_.at(static_cast<std::size_t>(i)); }
    const std::vector<ImagePlane>& channels() const noexcept { return channels_; }

    bool same_shape(const ImageStack& other) const noexcept {
        return channel_count() == other.channel_count() && width() == other.width() &&
               height() == other.height();
    }

    friend bool operator==(const ImageStack&, const ImageStack&) = default;

private:
    std::vector<ImagePlane> channels_;
    ColorSpace space_ = ColorSpace::RGB;
};

/// Positive rational resampling factor.
struct Scale {
    int num = 1;
    int den = 1;
    double value() const noexcept { return static_cast<double>(num) / den; }
};

/// Square convolution kernel of odd side.
class Kernel2D {
public:
    Kernel2D(int size, std::vector<double> taps);
    static Kernel2D identity() { return Kernel2D(1, {1.0}); }

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    double operator()(int x, int y) const { return taps_[static_cast<std::size_t>(y) * size_ + x]; }
    std::span<const double> taps() const noexcept { return taps_; }

    double sum() const;
    /// Non-negative taps summing to 1 within `tol`.
    bool is_normalized(double tol = 1e-6) const;

    friend bool operator==(const Kernel2D&, const Kernel2D&) = default;

private:
    int size_;
    std::vector<double> taps_;
};

struct PixelCoord {
    int x = 0;
    int y = 0;
    friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// Square window of an image, flattened row-major. The window's top-left
/// corner is `center - side / 2` for both odd and even sides.
struct Patch {
    PixelCoord center;
    int side = 0;
    std::vector<double> values;
};

inline int patch_origin(int center, int side) noexcept { return center - side / 2; }

/// Keys cubic convolution weight.
double cubic_weight(double t, double a = -0.5);

/// Separable bicubic resampling (a = -0.5, edge-replicated taps); output
/// size is round(input * scale); results are clamped to [0,1].
ImagePlane bicubic_resize(const ImagePlane& img, Scale scale);
ImageStack bicubic_resize(const ImageStack& img, Scale scale);

/// 2-D convolution with a normalized kernel, edge replication at borders.
ImagePlane convolve(const ImagePlane& img, const Kernel2D& kernel);

/// Mean over the (2r+1)^2 window clipped to the image, via an integral image.
ImagePlane box_filter(const ImagePlane& img, int radius);

/// Throws std::out_of_range if the window leaves the image.
Patch extract_patch(const ImagePlane& img, PixelCoord center, int side);

/// BT.601 luminance. A Luma stack is returned as-is.
ImagePlane rgb_to_luma(const ImageStack& img);

/// Replaces the luminance of `chroma_source`, keeping each channel's offset
/// from the old luminance, then clamps to [0,1].
ImageStack luma_recombine(const ImagePlane& luma, const ImageStack& chroma_source);

ImagePlane clamp01(ImagePlane img);
ImageStack clamp01(const ImageStack& img);

/// Snaps every value to the nearest multiple of 1/255 (what an 8-bit
/// round trip would produce).
ImageStack quantize_8bit(const ImageStack& img);

}  // namespace facerestore
