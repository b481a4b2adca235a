#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "facerestore/image.hpp"
#include "facerestore/rng.hpp"

namespace facerestore {

enum class KernelKind { Motion, Gaussian };

/// Blur + decimation recipe for synthesizing a low-resolution blurry input.
struct DegradeSpec {
    KernelKind kernel_kind = KernelKind::Motion;
    int kernel_size = 11;          ///< odd; motion kernels limited to [11, 31]
    double gaussian_sigma = 1.5;   ///< drawn from [1.4, 1.7] by sample_degrade_spec
    int scale_factor = 4;
    std::uint64_t rng_seed = 0;    ///< selects the motion-kernel bank entry

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

inline constexpr int kMinMotionKernel = 11;
inline constexpr int kMaxMotionKernel = 31;
inline constexpr double kMinGaussianSigma = 1.4;
inline constexpr double kMaxGaussianSigma = 1.7;
inline constexpr int kMotionBankSize = 200;

/// Camera-shake surrogate: an inertial random walk whose heading receives
/// a Gaussian kick every sub-pixel step.
struct MotionWalkParams {
    double length_factor = 0.6;       ///< trajectory length / (size - 1)
    double angle_noise = 0.3;         ///< std-dev of the per-step angular kick (rad)
    double inertia = 0.75;            ///< fraction of angular velocity kept per step
    int steps_per_pixel = 4;
    std::optional<double> initial_angle;  ///< random when unset
    std::optional<int> steps;             ///< overrides steps_per_pixel * length
};

/// Rasterizes the walk with bilinear splatting, recentred on its centre of
/// mass, shrunk if needed to fit size x size, normalized to sum 1.
Kernel2D gen_motion_kernel(int size, std::uint64_t seed, const MotionWalkParams& params = {});

/// exp(-(x^2 + y^2) / (2 sigma^2)) / Z over a size x size grid.
Kernel2D gen_gaussian_kernel(int size, double sigma);

/// The fixed bank of motion kernels, seeds 0..kMotionBankSize-1.
std::vector<Kernel2D> motion_kernel_bank(int size);

/// Bank entry selected by a run seed (a seeded index draw).
int motion_bank_index(std::uint64_t rng_seed);

Kernel2D degrade_kernel(const DegradeSpec& spec);

/// Blur then keep every scale_factor-th pixel, per channel.
ImageStack degrade(const ImageStack& hr, const DegradeSpec& spec);
ImageStack degrade_with_kernel(const ImageStack& hr, const Kernel2D& kernel, int scale_factor);

/// Draws kernel size (odd, [11,31]) and sigma ([1.4,1.7]) for the given kind.
DegradeSpec sample_degrade_spec(Rng& rng, KernelKind kind, int scale_factor = 4);

}  // namespace facerestore
