#include "facerestore/fsgn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "facerestore/errors.hpp"
#include "facerestore/rng.hpp"

namespace facerestore {

FeatureMap::FeatureMap(int channels, int width, int height, float fill)
    : channels_(channels), width_(width), height_(height) {
    if (channels < 0 || width < 0 || height < 0) throw std::invalid_argument("FeatureMap: negative dimensions");
    data_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

namespace {

LayerSpec conv_spec(std::string name, int in, int out, int dilation, Activation act) {
    return LayerSpec{std::move(name), in, out, 3, dilation, dilation, true, act};
}

void check_layer(const LayerSpec& s) {
    if (s.pad != s.dilation * (s.kernel / 2))
        throw std::logic_error("layer " + s.name + ": padding does not preserve the feature map size");
}

}  // namespace

FsgnModel build_fsgn_spec() {
    FsgnModel m;
    m.layers_.push_back({conv_spec("conv1", kFsgnInputChannels, kFsgnFeatures, 1, Activation::Relu), {}, {}});
    for (std::size_t g = 0; g < kFsgnGroupDilations.size(); ++g) {
        const int d = kFsgnGroupDilations[g];
        for (int b = 1; b <= kFsgnBlocksPerGroup; ++b) {
            const std::string prefix = "conv" + std::to_string(g + 2) + "_" + std::to_string(b);
            m.layers_.push_back({conv_spec(prefix + "a", kFsgnFeatures, kFsgnFeatures, d, Activation::Relu), {}, {}});
            m.layers_.push_back({conv_spec(prefix + "b", kFsgnFeatures, kFsgnFeatures, d, Activation::None), {}, {}});
            ++m.blocks_;
        }
    }
    m.layers_.push_back({conv_spec("conv7", kFsgnFeatures, kFsgnFeatures, 1, Activation::Relu), {}, {}});
    m.layers_.push_back({conv_spec("conv8", kFsgnFeatures, kFsgnOutputChannels, 1, Activation::None), {}, {}});
    for (const auto& l : m.layers_) check_layer(l.spec);
    return m;
}

int FsgnModel::receptive_field() const {
    int rf = 1;
    for (const auto& l : layers_) rf += 2 * l.spec.dilation * (l.spec.kernel / 2);
    return rf;
}

std::vector<Tensor> FsgnModel::to_tensors() const {
    std::vector<Tensor> out;
    for (const auto& l : layers_) {
        const auto& s = l.spec;
        out.push_back({s.name + ".weight",
                       {static_cast<std::uint32_t>(s.out_channels), static_cast<std::uint32_t>(s.in_channels),
                        static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel)},
                       l.weights});
        if (s.has_bias) out.push_back({s.name + ".bias", {static_cast<std::uint32_t>(s.out_channels)}, l.bias});
    }
    return out;
}

void init_constant(FsgnModel& model, float value) {
    for (auto& l : model.layers()) {
        const auto& s = l.spec;
        l.weights.assign(static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel, value);
        l.bias.assign(s.has_bias ? static_cast<std::size_t>(s.out_channels) : 0, value);
    }
    model.mark_loaded();
}

void init_he_normal(FsgnModel& model, std::uint64_t seed, float residual_scale) {
    init_constant(model, 0.0f);
    Rng rng(seed);
    for (auto& l : model.layers()) {
        const auto& s = l.spec;
        const bool closing = s.activation == Activation::None;
        const double stddev = std::sqrt(2.0 / (s.in_channels * s.kernel * s.kernel)) * (closing ? residual_scale : 1.0f);
        for (auto& w : l.weights) w = static_cast<float>(stddev * rng.normal());
    }
}

FeatureMap dilated_conv(const FeatureMap& input, const ConvLayer& layer) {
    const auto& s = layer.spec;
    if (input.channels() != s.in_channels)
        throw std::invalid_argument("layer " + s.name + ": expected " + std::to_string(s.in_channels) +
                                    " input channels, got " + std::to_string(input.channels()));
    if (layer.weights.size() != static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel)
        throw StateError("layer " + s.name + ": weights not loaded");
    const int w = input.width();
    const int h = input.height();
    FeatureMap out(s.out_channels, w, h);
    const int half = s.kernel / 2;

    // Per output pixel the summation order is fixed: bias, then (in, ky, kx).
#pragma omp parallel for schedule(static)
    for (int o = 0; o < s.out_channels; ++o) {
        float* dst = out.plane(o).data();
        std::fill(dst, dst + out.plane_size(), s.has_bias ? layer.bias[static_cast<std::size_t>(o)] : 0.0f);
        for (int i = 0; i < s.in_channels; ++i) {
            const float* src = input.plane(i).data();
            for (int ky = 0; ky < s.kernel; ++ky) {
                const int dy = (ky - half) * s.dilation;
                const int y0 = std::max(0, -dy);
                const int y1 = std::min(h, h - dy);
                for (int kx = 0; kx < s.kernel; ++kx) {
                    const int dx = (kx - half) * s.dilation;
                    const int x0 = std::max(0, -dx);
                    const int x1 = std::min(w, w - dx);
                    const float wt = layer.weight(o, i, ky, kx);
                    for (int y = y0; y < y1; ++y) {
                        float* drow = dst + static_cast<std::ptrdiff_t>(y) * w;
                        const float* srow = src + static_cast<std::ptrdiff_t>(y + dy) * w + dx;
                        for (int x = x0; x < x1; ++x) drow[x] += wt * srow[x];
                    }
                }
            }
        }
        if (s.activation == Activation::Relu)
            for (std::size_t k = 0; k < out.plane_size(); ++k) dst[k] = std::max(dst[k], 0.0f);
    }
    return out;
}

FeatureMap pack_fsgn_input(const ImageStack& rgb_up, const FacialMaskSet& masks) {
    if (rgb_up.color_space() != ColorSpace::RGB || rgb_up.channel_count() != 3)
        throw std::invalid_argument("fsgn: input must be an RGB stack");
    if (masks.width() != rgb_up.width() || masks.height() != rgb_up.height())
        throw std::invalid_argument("fsgn: masks " + std::to_string(masks.width()) + "x" +
                                    std::to_string(masks.height()) + " do not match image " +
                                    std::to_string(rgb_up.width()) + "x" + std::to_string(rgb_up.height()));
    FeatureMap in(kFsgnInputChannels, rgb_up.width(), rgb_up.height());
    for (int c = 0; c < 3; ++c) {
        auto dst = in.plane(c);
        const auto src = rgb_up.channel(c).data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(src[k]);
    }
    for (int c = 0; c < kComponentCount; ++c) {
        auto dst = in.plane(3 + c);
        const auto src = masks.masks[static_cast<std::size_t>(c)].data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(src[k]);
    }
    return in;
}

namespace {

void add_inplace(FeatureMap& acc, const FeatureMap& x) {
    auto a = acc.data();
    const auto b = x.data();
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
}

void check_same_size(const FeatureMap& a, const FeatureMap& b, const std::string& layer) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::logic_error("layer " + layer + " changed the feature map size");
}

// conv8 output, before the global residual.
FeatureMap run_layers(const FsgnModel& model, const FeatureMap& input) {
    if (!model.weights_loaded()) throw StateError("fsgn: model weights are not loaded");
    const auto& layers = model.layers();
    std::size_t li = 0;
    auto conv = [&](const FeatureMap& x) {
        FeatureMap y = dilated_conv(x, layers[li]);
        check_same_size(x, y, layers[li].spec.name);
        ++li;
        return y;
    };
    const FeatureMap f1 = conv(input);
    FeatureMap h = f1;
    for (int b = 0; b < model.residual_block_count(); ++b) {
        const FeatureMap t = conv(h);
        add_inplace(h, conv(t));
    }
    h = conv(h);
    add_inplace(h, f1);
    return conv(h);
}

}  // namespace

ImageStack fsgn_forward(const FsgnModel& model, const ImageStack& rgb_up, const FacialMaskSet& masks) {
    const FeatureMap residual = run_layers(model, pack_fsgn_input(rgb_up, masks));
    std::vector<ImagePlane> out;
    for (int c = 0; c < kFsgnOutputChannels; ++c) {
        ImagePlane p(rgb_up.width(), rgb_up.height());
        const auto r = residual.plane(c);
        const auto src = rgb_up.channel(c).data();
        auto dst = p.data();
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] = std::clamp(static_cast<double>(r[k]) + src[k], 0.0, 1.0);
        out.push_back(std::move(p));
    }
    return ImageStack(std::move(out), ColorSpace::RGB);
}

ImageStack fsgn_forward(const FsgnModel& model, const FeatureMap& input) {
    if (input.channels() != kFsgnInputChannels) throw std::invalid_argument("fsgn: expected a 7-channel input");
    const FeatureMap residual = run_layers(model, input);
    std::vector<ImagePlane> out;
    for (int c = 0; c < kFsgnOutputChannels; ++c) {
        ImagePlane p(input.width(), input.height());
        const auto r = residual.plane(c);
        const auto src = input.plane(c);
        auto dst = p.data();
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] = std::clamp(static_cast<double>(r[k]) + static_cast<double>(src[k]), 0.0, 1.0);
        out.push_back(std::move(p));
    }
    return ImageStack(std::move(out), ColorSpace::RGB);
}

FsgnModel model_from_tensors(const std::vector<Tensor>& tensors) {
    using Kind = TensorFileError::Kind;
    std::map<std::string, const Tensor*> by_name;
    for (const auto& t : tensors) by_name[t.name] = &t;

    FsgnModel model = build_fsgn_spec();
    std::size_t used = 0;
    auto take = [&](const std::string& layer, const std::string& name, const std::vector<std::uint32_t>& dims) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw TensorFileError(Kind::MissingTensor, "layer " + layer + ": missing tensor " + name);
        if (it->second->dims != dims) {
            std::string got, want;
            for (auto d : it->second->dims) got += (got.empty() ? "" : "x") + std::to_string(d);
            for (auto d : dims) want += (want.empty() ? "" : "x") + std::to_string(d);
            throw TensorFileError(Kind::ShapeMismatch, "layer " + layer + ": tensor " + name + " has shape " + got +
                                                           ", expected " + want);
        }
        ++used;
        return it->second->values;
    };
    for (auto& l : model.layers()) {
        const auto& s = l.spec;
        l.weights = take(s.name, s.name + ".weight",
                         {static_cast<std::uint32_t>(s.out_channels), static_cast<std::uint32_t>(s.in_channels),
                          static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.kernel)});
        if (s.has_bias) l.bias = take(s.name, s.name + ".bias", {static_cast<std::uint32_t>(s.out_channels)});
    }
    if (used != tensors.size())
        throw TensorFileError(Kind::ShapeMismatch, "weights file holds tensors the network does not use");
    model.mark_loaded();
    return model;
}

FsgnModel load_weights(const std::filesystem::path& path) { return model_from_tensors(read_tensor_file(path)); }

void save_weights(const FsgnModel& model, const std::filesystem::path& path) {
    if (!model.weights_loaded()) throw StateError("save_weights: model has no weights");
    write_tensor_file(path, model.to_tensors());
}

double euclidean_loss(const ImageStack& pred, const ImageStack& gt) {
    if (!pred.same_shape(gt)) throw std::invalid_argument("euclidean_loss: shape mismatch");
    double sum = 0.0;
    std::size_t n = 0;
    for (int c = 0; c < pred.channel_count(); ++c) {
        const auto a = pred.channel(c).data();
        const auto b = gt.channel(c).data();
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double d = a[k] - b[k];
            sum += d * d;
        }
        n += a.size();
    }
    return sum / static_cast<double>(n);
}

}  // namespace facerestore
