#pragma once

#include <filesystem>
#include <vector>

#include "facerestore/image.hpp"

namespace facerestore {

/// 10 log10(1 / MSE) over all channels, [0,1] scale. Identical images give
/// +infinity.
double psnr(const ImageStack& a, const ImageStack& b);

/// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
/// C2 = 0.03^2, averaged over every window position fully inside the image.
double ssim(const ImagePlane& a, const ImagePlane& b);
/// SSIM of the luminance planes.
double ssim(const ImageStack& a, const ImageStack& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// PCA ("eigenface") projection of flattened luminance.
struct IdentityProjector {
    int width = 0;
    int height = 0;
    std::vector<double> mean;   ///< length width*height
    std::vector<double> basis;  ///< dims() rows of length width*height, orthonormal
    std::vector<double> eigenvalues;

    int dims() const noexcept {
        return mean.empty() ? 0 : static_cast<int>(basis.size() / mean.size());
    }
    std::vector<double> project(const ImageStack& img) const;
};

inline constexpr int kIdentityMaxDims = 100;

/// Basis of min(max_dims, N-1) leading eigenvectors of the training
/// covariance (components with numerically zero variance are dropped).
/// Throws std::invalid_argument for fewer than two images or mixed sizes.
IdentityProjector build_projector(const std::vector<ImageStack>& training, int max_dims = kIdentityMaxDims);

/// Cosine similarity of the two coefficient vectors; 0 when either is zero.
double identity_similarity(const ImageStack& result, const ImageStack& gt, const IdentityProjector& projector);

/// Same tensor container as the network weights: "mean" [D], "basis" [d, D],
/// "eigenvalues" [d], "dims" [2] (width, height).
void save_projector(const IdentityProjector& projector, const std::filesystem::path& path);
IdentityProjector load_projector(const std::filesystem::path& path);

}  // namespace facerestore
