#include "facerestore/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace facerestore {

void DegradeSpec::validate() const {
    if (kernel_size % 2 == 0 || kernel_size < 1)
        throw std::invalid_argument("degrade: kernel size must be odd");
    if (kernel_kind == KernelKind::Motion && (kernel_size < kMinMotionKernel || kernel_size > kMaxMotionKernel))
        throw std::invalid_argument("degrade: motion kernel size must lie in [11, 31], got " + std::to_string(kernel_size));
    if (kernel_kind == KernelKind::Gaussian && !(gaussian_sigma > 0.0))
        throw std::invalid_argument("degrade: gaussian sigma must be positive");
    if (scale_factor < 1) throw std::invalid_argument("degrade: scale factor must be >= 1");
}

Kernel2D gen_motion_kernel(int size, std::uint64_t seed, const MotionWalkParams& params) {
    if (size < 3 || size % 2 == 0) throw std::invalid_argument("gen_motion_kernel: size must be odd and >= 3");
    Rng rng(seed);
    const double length = params.length_factor * (size - 1);
    const int steps = params.steps ? *params.steps
                                   : std::max(2, static_cast<int>(std::lround(length * params.steps_per_pixel)));
    if (steps < 1) throw std::invalid_argument("gen_motion_kernel: need at least one step");
    const double step = length / steps;

    double angle = params.initial_angle ? *params.initial_angle : rng.uniform(0.0, 2.0 * std::numbers::pi);
    double omega = 0.0;
    std::vector<double> xs{0.0}, ys{0.0};
    double x = 0.0, y = 0.0;
    for (int i = 0; i < steps; ++i) {
        x += step * std::cos(angle);
        y += step * std::sin(angle);
        xs.push_back(x);
        ys.push_back(y);
        omega = params.inertia * omega + params.angle_noise * rng.normal();
        angle += omega;
    }

    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cx += xs[i];
        cy += ys[i];
    }
    cx /= static_cast<double>(xs.size());
    cy /= static_cast<double>(ys.size());
    const double half = (size - 1) / 2.0;
    double extent = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] -= cx;
        ys[i] -= cy;
        extent = std::max({extent, std::abs(xs[i]), std::abs(ys[i])});
    }
    const double shrink = extent > half ? half / extent : 1.0;

    std::vector<double> taps(static_cast<std::size_t>(size) * size, 0.0);
    auto splat = [&](int ix, int iy, double w) {
        if (w <= 0.0 || ix < 0 || iy < 0 || ix >= size || iy >= size) return;
        taps[static_cast<std::size_t>(iy) * size + ix] += w;
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = std::clamp(half + xs[i] * shrink, 0.0, size - 1.0);
        const double py = std::clamp(half + ys[i] * shrink, 0.0, size - 1.0);
        const int ix = static_cast<int>(std::floor(px));
        const int iy = static_cast<int>(std::floor(py));
        const double fx = px - ix;
        const double fy = py - iy;
        splat(ix, iy, (1 - fx) * (1 - fy));
        splat(ix + 1, iy, fx * (1 - fy));
        splat(ix, iy + 1, (1 - fx) * fy);
        splat(ix + 1, iy + 1, fx * fy);
    }
    double total = 0.0;
    for (double t : taps) total += t;
    for (double& t : taps) t /= total;
    return Kernel2D(size, std::move(taps));
}

Kernel2D gen_gaussian_kernel(int size, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gen_gaussian_kernel: sigma must be positive");
    if (size < 1 || size % 2 == 0) throw std::invalid_argument("gen_gaussian_kernel: size must be odd");
    const int r = size / 2;
    std::vector<double> taps(static_cast<std::size_t>(size) * size);
    double z = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            const double v = std::exp(-static_cast<double>(x * x + y * y) / (2.0 * sigma * sigma));
            taps[static_cast<std::size_t>(y + r) * size + (x + r)] = v;
            z += v;
        }
    for (double& t : taps) t /= z;
    return Kernel2D(size, std::move(taps));
}

std::vector<Kernel2D> motion_kernel_bank(int size) {
    std::vector<Kernel2D> bank;
    bank.reserve(kMotionBankSize);
    for (int i = 0; i < kMotionBankSize; ++i) bank.push_back(gen_motion_kernel(size, static_cast<std::uint64_t>(i)));
    return bank;
}

int motion_bank_index(std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return rng.uniform_int(0, kMotionBankSize - 1);
}

Kernel2D degrade_kernel(const DegradeSpec& spec) {
    spec.validate();
    if (spec.kernel_kind == KernelKind::Gaussian) return gen_gaussian_kernel(spec.kernel_size, spec.gaussian_sigma);
    return gen_motion_kernel(spec.kernel_size, static_cast<std::uint64_t>(motion_bank_index(spec.rng_seed)));
}

ImageStack degrade_with_kernel(const ImageStack& hr, const Kernel2D& kernel, int scale_factor) {
    if (scale_factor < 1) throw std::invalid_argument("degrade: scale factor must be >= 1");
    if (hr.empty()) throw std::invalid_argument("degrade: empty image");
    if (hr.width() % scale_factor != 0 || hr.height() % scale_factor != 0)
        throw std::invalid_argument("degrade: image dimensions " + std::to_string(hr.width()) + "x" +
                                    std::to_string(hr.height()) + " not divisible by scale " +
                                    std::to_string(scale_factor));
    const int ow = hr.width() / scale_factor;
    const int oh = hr.height() / scale_factor;
    std::vector<ImagePlane> out;
    for (const auto& c : hr.channels()) {
        const ImagePlane blurred = convolve(c, kernel);
        ImagePlane small(ow, oh);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) small(x, y) = blurred(x * scale_factor, y * scale_factor);
        out.push_back(std::move(small));
    }
    return ImageStack(std::move(out), hr.color_space());
}

ImageStack degrade(const ImageStack& hr, const DegradeSpec& spec) {
    return degrade_with_kernel(hr, degrade_kernel(spec), spec.scale_factor);
}

DegradeSpec sample_degrade_spec(Rng& rng, KernelKind kind, int scale_factor) {
    DegradeSpec spec;
    spec.kernel_kind = kind;
    spec.kernel_size = kMinMotionKernel + 2 * rng.uniform_int(0, (kMaxMotionKernel - kMinMotionKernel) / 2);
    spec.gaussian_sigma = rng.uniform(kMinGaussianSigma, kMaxGaussianSigma);
    spec.scale_factor = scale_factor;
    spec.rng_seed = rng.next_u64();
    return spec;
}

}  // namespace facerestore
