#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "facerestore/image.hpp"

namespace facerestore {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

enum class FacialComponent { Eyebrows = 0, Eyes = 1, Nose = 2, Mouth = 3 };
inline constexpr int kComponentCount = 4;
std::string_view component_name(FacialComponent c);

/// Point-indexing convention. Each component is a list of point groups;
/// a hull is filled per group and the groups of a component are unioned
/// (left and right eye, for example).
struct LandmarkLayout {
    std::string name;
    int point_count = 0;  ///< 0 accepts any count
    std::array<std::vector<std::vector<int>>, kComponentCount> groups;
};

/// The 68-point convention: eyebrows 17-26, eyes 36-47, nose 27-35, mouth 48-67.
const LandmarkLayout& layout_68();
/// Any number of points, no component groups.
const LandmarkLayout& layout_raw();
/// Looks up a built-in layout by name ("68", "raw"); throws std::invalid_argument.
const LandmarkLayout& layout_by_name(std::string_view name);

struct LandmarkSet {
    std::vector<Point2> points;
    std::string layout = "68";
};

/// Landmark text file:
///
///   [layout: <name>]
///   N
///   x y     (N lines, decimal, sub-pixel allowed)
///
/// Throws ParseError (with line number) on a wrong count, non-numeric token,
/// or a negative / non-finite coordinate.
LandmarkSet parse_landmarks(std::string_view text, std::string_view default_layout = "68");
LandmarkSet load_landmarks(const std::string& path, std::string_view default_layout = "68");
std::string format_landmarks(const LandmarkSet& lm);

struct FacialMaskSet {
    std::array<ImagePlane, kComponentCount> masks;  ///< eyebrows, eyes, nose, mouth
    std::vector<std::string> warnings;
    int clamped_points = 0;

    const ImagePlane& operator[](FacialComponent c) const { return masks[static_cast<std::size_t>(c)]; }
    int width() const { return masks[0].width(); }
    int height() const { return masks[0].height(); }
    ImageStack as_stack() const;
};

inline constexpr int kMaskDilation = 3;

/// Convex hull (counter-clockwise, collinear points dropped). Fewer than 3
/// vertices means the group is degenerate.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Filled hull of `points`, dilated by a disk of radius `dilation` pixels.
/// Returns an all-zero plane for degenerate groups.
ImagePlane rasterize_component(const std::vector<Point2>& points, int width, int height,
                               int dilation = kMaskDilation);

/// Points outside the canvas are clamped (counted in clamped_points).
FacialMaskSet rasterize_masks(const LandmarkSet& lm, int width, int height);
FacialMaskSet rasterize_masks(const LandmarkSet& lm, int width, int height, const LandmarkLayout& layout);

/// Translates each mask by its own seeded vector of length `deviation`
/// (rounded to whole pixels); content shifted past the border is dropped.
FacialMaskSet perturb_masks(const FacialMaskSet& masks, double deviation, std::uint64_t seed);

/// Integer translation with zero fill.
ImagePlane shift_plane(const ImagePlane& img, int dx, int dy);

}  // namespace facerestore
