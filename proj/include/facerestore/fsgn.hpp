#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "facerestore/face_masks.hpp"
#include "facerestore/image.hpp"
#include "facerestore/tensor_io.hpp"

namespace facerestore {

enum class Activation { None, Relu };

struct LayerSpec {
    std::string name;
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int pad = 1;
    int dilation = 1;
    bool has_bias = true;
    Activation activation = Activation::None;
};

/// Weights are laid out (out_ch, in_ch, ky, kx), row-major.
struct ConvLayer {
    LayerSpec spec;
    std::vector<float> weights;
    std::vector<float> bias;

    float weight(int o, int i, int ky, int kx) const {
        return weights[((static_cast<std::size_t>(o) * spec.in_channels + i) * spec.kernel + ky) * spec.kernel + kx];
    }
};

/// Planar float activations (channel-major, each plane row-major).
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(int channels, int width, int height, float fill = 0.0f);

    int channels() const noexcept { return channels_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    std::span<float> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
    std::span<const float> plane(int c) const { return {data_.data() + c * plane_size(), plane_size()}; }
    float& at(int c, int x, int y) { return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x]; }
    float at(int c, int x, int y) const { return data_[c * plane_size() + static_cast<std::size_t>(y) * width_ + x]; }
    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

private:
    int channels_ = 0;
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

inline constexpr int kFsgnInputChannels = 7;  // RGB + four component masks
inline constexpr int kFsgnFeatures = 64;
inline constexpr int kFsgnOutputChannels = 3;
inline constexpr std::array<int, 5> kFsgnGroupDilations = {5, 4, 3, 2, 1};
inline constexpr int kFsgnBlocksPerGroup = 5;

/// Facial structure generation network.
///
/// conv1 (7->64, relu) -> 25 residual blocks in five groups with dilations
/// 5,4,3,2,1, each block conv(d, relu) -> conv(d) -> + skip -> conv7 (relu)
/// -> + conv1 output -> conv8 (64->3) -> + RGB input -> clamp [0,1].
/// Every conv is 3x3 with pad == dilation, so feature maps keep the input
/// size throughout.
class FsgnModel {
public:
    const std::vector<ConvLayer>& layers() const noexcept { return layers_; }
    std::vector<ConvLayer>& layers() noexcept { return layers_; }
    bool weights_loaded() const noexcept { return loaded_; }
    void mark_loaded() noexcept { loaded_ = true; }

    int conv_count() const noexcept { return static_cast<int>(layers_.size()); }
    int residual_block_count() const noexcept { return blocks_; }

    /// Side of the square receptive field of one output pixel.
    int receptive_field() const;

    std::vector<Tensor> to_tensors() const;

private:
    friend FsgnModel build_fsgn_spec();
    std::vector<ConvLayer> layers_;
    int blocks_ = 0;
    bool loaded_ = false;
};

/// Topology with zero-sized weight buffers; weights_loaded() is false.
FsgnModel build_fsgn_spec();

/// Every weight and bias set to `value`; marks the model loaded.
void init_constant(FsgnModel& model, float value);
/// He-normal fan-in convs, zero biases; block-closing convs and conv8 scaled by `residual_scale`.
void init_he_normal(FsgnModel& model, std::uint64_t seed, float residual_scale = 1.0f);

/// 3x3 conv with zero padding `pad` and tap spacing `dilation`, plus the
/// layer's activation. Throws std::invalid_argument on channel mismatch.
FeatureMap dilated_conv(const FeatureMap& input, const ConvLayer& layer);

/// Stacks RGB and the four masks into the 7-channel network input.
FeatureMap pack_fsgn_input(const ImageStack& rgb_up, const FacialMaskSet& masks);

/// Base image in [0,1]. Throws StateError without weights and
/// std::invalid_argument on dimension mismatch.
ImageStack fsgn_forward(const FsgnModel& model, const ImageStack& rgb_up, const FacialMaskSet& masks);
ImageStack fsgn_forward(const FsgnModel& model, const FeatureMap& input);

/// Validates names and shapes against build_fsgn_spec(); TensorFileError
/// (ShapeMismatch / MissingTensor) names the offending layer.
FsgnModel model_from_tensors(const std::vector<Tensor>& tensors);
FsgnModel load_weights(const std::filesystem::path& path);
void save_weights(const FsgnModel& model, const std::filesystem::path& path);

/// Mean of squared differences over all channels and pixels.
double euclidean_loss(const ImageStack& pred, const ImageStack& gt);

}  // namespace facerestore
