#pragma once

#include "facerestore/image.hpp"

namespace facerestore {

struct GuidedFilterParams {
    int radius = 8;
    double epsilon = 1e-3;  ///< on the [0,1] intensity scale

    /// Throws std::invalid_argument unless radius >= 1 and epsilon > 0.
    void validate() const;
};

/// Guided filter: q = mean(a) * I + mean(b) with
/// a = cov(I, p) / (var(I) + eps), b = mean(p) - a * mean(I), every mean a
/// clipped-window box filter of the given radius.
ImagePlane guided_filter(const ImagePlane& input, const ImagePlane& guide, const GuidedFilterParams& params);

struct TransferResult {
    ImagePlane filtered_base;       ///< GF(base luma; guide regressed)
    ImagePlane filtered_regressed;  ///< GF(regressed; guide regressed)
    ImagePlane detail;              ///< regressed - filtered_regressed
    ImagePlane luma;                ///< clamped output luminance
    ImageStack output;              ///< luma recombined with the base chroma
};

/// Keeps the base image's low frequencies and adds the regressed image's
/// high frequencies, on luminance. Evaluated as
/// clamp(R + (GF(base; R) - GF(R; R))) so that transfer_details(x, x) == x
/// holds bit-exactly.
TransferResult transfer_details_full(const ImageStack& base, const ImageStack& regressed,
                                     const GuidedFilterParams& params);
ImageStack transfer_details(const ImageStack& base, const ImageStack& regressed, const GuidedFilterParams& params);

}  // namespace facerestore
