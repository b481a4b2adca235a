#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "facerestore/image.hpp"

namespace facerestore {

/// K-NN search and regression settings.
struct MatchParams {
    double alpha = 0.5;             ///< weight of the NCC term in the patch distance
    int k = 5;                      ///< candidates kept per patch
    int patch_side = 20;
    std::optional<double> lambda;   ///< ridge weight; unset means the patch pixel count on the 8-bit scale
    int stride = 1;

    /// patch_side^2 measured in 8-bit units, i.e. patch_side^2 / 255^2 on
    /// the [0,1] scale used here.
    double effective_lambda() const {
        return lambda ? *lambda : static_cast<double>(patch_side) * patch_side / (255.0 * 255.0);
    }
    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Which patches feed the regression (H) and the reconstruction (H-bar).
enum class RegressionSource {
    Matched,          ///< H-bar == H: the matched exemplar patches themselves
    SmoothedToSharp,  ///< H from Gaussian-smoothed exemplars, H-bar from the originals
};

struct ExemplarOptions {
    int patch_side = 20;
    int search_radius = 10;
    RegressionSource source = RegressionSource::Matched;
    double smooth_sigma = 1.5;
};

/// Immutable set of HR exemplars prepared for windowed patch search.
///
/// For every exemplar and every window position the patch mean and the
/// centred sum of squares sum (v - mean)^2 are tabulated once at build time,
/// each from a direct two-pass sum over the window, so windows with equal
/// content get bit-identical statistics.
class ExemplarDB {
public:
    struct WindowStats {
        double mean = 0.0;
        double sumsq = 0.0;
    };

    /// Throws ConfigError for an empty set, std::invalid_argument when the
    /// exemplars differ in size or are smaller than one patch.
    static ExemplarDB build(const std::vector<ImageStack>& images, const ExemplarOptions& options);

    /// Loads every PNG/PGM/PPM in `dir` (sorted by file name). With a cache
    /// directory, statistics tables are reused across runs, keyed by a hash
    /// of the pixel content and options.
    static ExemplarDB from_directory(const std::filesystem::path& dir, const ExemplarOptions& options,
                                     const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

    int size() const noexcept { return static_cast<int>(entries_.size()); }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const ExemplarOptions& options() const noexcept { return options_; }

    /// Luminance plane searched and regressed against (H).
    const ImagePlane& search_plane(int i) const { return entries_.at(static_cast<std::size_t>(i)).search; }
    /// Luminance plane the output patches are drawn from (H-bar).
    const ImagePlane& hr_plane(int i) const { return entries_.at(static_cast<std::size_t>(i)).hr; }

    /// Statistics of the search-plane window whose top-left corner is (x, y).
    WindowStats stats(int i, int x, int y) const {
        const auto& e = entries_[static_cast<std::size_t>(i)];
        return e.stats[static_cast<std::size_t>(y) * (width_ - options_.patch_side + 1) + x];
    }

    std::uint64_t content_hash(int i) const { return entries_.at(static_cast<std::size_t>(i)).hash; }

private:
    struct Entry {
        ImagePlane search;
        ImagePlane hr;
        std::vector<WindowStats> stats;
        std::uint64_t hash = 0;
    };
    static Entry prepare(const ImageStack& img, const ExemplarOptions& options,
                         const std::optional<std::filesystem::path>& cache_dir);

    ExemplarOptions options_;
    int width_ = 0;
    int height_ = 0;
    std::vector<Entry> entries_;
};

/// Normalized cross-correlation in [-1, 1]; 0 when either patch is flat.
double patch_ncc(std::span<const double> a, std::span<const double> b);
double mean_abs_diff(std::span<const double> a, std::span<const double> b);

/// alpha * (1 - NCC) + (1 - alpha) * mean |a - b|.
double patch_distance(const Patch& a, const Patch& b, double alpha);

struct Candidate {
    int exemplar = 0;
    PixelCoord center;
    double distance = 0.0;
    std::vector<double> values;     ///< H: regression patch
    std::vector<double> hr_values;  ///< H-bar: reconstruction patch
};

/// One best window per exemplar inside the (2r+1)^2 search region centred
/// at `center`, then the K smallest distances. Ties go to the lower
/// exemplar index, and within an exemplar to the earlier row-major position.
std::vector<Candidate> knn_search(const ExemplarDB& db, const ImagePlane& base, PixelCoord center,
                                  const MatchParams& params);

/// F = (H^T H + lambda Id)^-1 H^T I via Cholesky of the K x K system.
/// `columns` holds the K candidate vectors.
std::vector<double> solve_regression(const std::vector<std::vector<double>>& columns, std::span<const double> target,
                                     double lambda);

struct EnergyTerms {
    double data = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

/// ||H F - I||^2 and lambda ||F||^2.
EnergyTerms regression_energy(const std::vector<std::vector<double>>& columns, std::span<const double> target,
                              std::span<const double> coeffs, double lambda);

/// R = sum_i F_i * H-bar_i.
std::vector<double> map_patch(const std::vector<std::vector<double>>& hr_columns, std::span<const double> coeffs);

struct RegressionPatch {
    PixelCoord center;
    std::vector<std::vector<double>> candidates;  ///< H
    std::vector<std::vector<double>> matched_hr;  ///< H-bar
    std::vector<double> coeffs;                   ///< F
    std::vector<double> output;                   ///< R
};

RegressionPatch regress_patch(const ExemplarDB& db, const ImagePlane& base_luma, PixelCoord center,
                              const MatchParams& params);

/// Regressed luminance image: every window on the stride grid is regressed
/// and overlapping outputs are averaged; uncovered pixels keep the base
/// luminance. Returns a Luma stack.
ImageStack regress_image(const ExemplarDB& db, const ImageStack& base, const MatchParams& params);

}  // namespace facerestore
