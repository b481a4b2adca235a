#include "facerestore/face_masks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "facerestore/errors.hpp"
#include "facerestore/rng.hpp"

namespace facerestore {

std::string_view component_name(FacialComponent c) {
    switch (c) {
        case FacialComponent::Eyebrows: return "eyebrows";
        case FacialComponent::Eyes: return "eyes";
        case FacialComponent::Nose: return "nose";
        case FacialComponent::Mouth: return "mouth";
    }
    return "?";
}

namespace {

std::vector<int> iota_range(int first, int last) {
    std::vector<int> v(static_cast<std::size_t>(last - first + 1));
    std::iota(v.begin(), v.end(), first);
    return v;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

double parse_number(std::string_view tok, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "non-numeric token '" + std::string(tok) + "'");
    return v;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

const LandmarkLayout& layout_68() {
    static const LandmarkLayout layout = [] {
        LandmarkLayout l;
        l.name = "68";
        l.point_count = 68;
        l.groups[static_cast<int>(FacialComponent::Eyebrows)] = {iota_range(17, 21), iota_range(22, 26)};
        l.groups[static_cast<int>(FacialComponent::Eyes)] = {iota_range(36, 41), iota_range(42, 47)};
        l.groups[static_cast<int>(FacialComponent::Nose)] = {iota_range(27, 35)};
        l.groups[static_cast<int>(FacialComponent::Mouth)] = {iota_range(48, 67)};
        return l;
    }();
    return layout;
}

const LandmarkLayout& layout_raw() {
    static const LandmarkLayout layout{"raw", 0, {}};
    return layout;
}

const LandmarkLayout& layout_by_name(std::string_view name) {
    if (name == "68") return layout_68();
    if (name == "raw") return layout_raw();
    throw std::invalid_argument("unknown landmark layout '" + std::string(name) + "'");
}

LandmarkSet parse_landmarks(std::string_view text, std::string_view default_layout) {
    LandmarkSet lm;
    lm.layout = std::string(default_layout);
    int line_no = 0;
    int declared = -1;
    int count_line = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;

        if (declared < 0) {
            if (line.starts_with("layout:")) {
                lm.layout = std::string(trim(line.substr(7)));
                continue;
            }
            const auto toks = split_ws(line);
            if (toks.size() != 1) throw ParseError(line_no, "expected the point count");
            const double n = parse_number(toks[0], line_no);
            if (n < 0 || n != std::floor(n)) throw ParseError(line_no, "point count must be a non-negative integer");
            declared = static_cast<int>(n);
            count_line = line_no;
            const LandmarkLayout* layout = nullptr;
            try {
                layout = &layout_by_name(lm.layout);
            } catch (const std::invalid_argument& e) {
                throw ParseError(line_no, e.what());
            }
            if (layout->point_count != 0 && layout->point_count != declared)
                throw ParseError(line_no, "layout '" + lm.layout + "' needs " + std::to_string(layout->point_count) +
                                              " points, file declares " + std::to_string(declared));
            continue;
        }

        if (static_cast<int>(lm.points.size()) == declared)
            throw ParseError(line_no, "more points than the declared " + std::to_string(declared));
        const auto toks = split_ws(line);
        if (toks.size() != 2) throw ParseError(line_no, "expected 'x y'");
        const Point2 p{parse_number(toks[0], line_no), parse_number(toks[1], line_no)};
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0)
            throw ParseError(line_no, "coordinate out of range");
        lm.points.push_back(p);
    }
    if (declared < 0) throw ParseError(line_no, "missing point count");
    if (static_cast<int>(lm.points.size()) != declared)
        throw ParseError(line_no, "declared " + std::to_string(declared) + " points (line " +
                                      std::to_string(count_line) + ") but found " +
                                      std::to_string(lm.points.size()));
    return lm;
}

LandmarkSet load_landmarks(const std::string& path, std::string_view default_layout) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open landmark file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_landmarks(ss.str(), default_layout);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.what());
    }
}

std::string format_landmarks(const LandmarkSet& lm) {
    std::ostringstream out;
    out.precision(17);
    out << "layout: " << lm.layout << '\n' << lm.points.size() << '\n';
    for (const auto& p : lm.points) out << p.x << ' ' << p.y << '\n';
    return out.str();
}

ImageStack FacialMaskSet::as_stack() const {
    return ImageStack(std::vector<ImagePlane>(masks.begin(), masks.end()), ColorSpace::Mask);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

ImagePlane rasterize_component(const std::vector<Point2>& points, int width, int height, int dilation) {
    ImagePlane mask(width, height, 0.0);
    const auto hull = convex_hull(points);
    if (hull.size() < 3) return mask;

    constexpr double eps = 1e-9;
    double minx = hull[0].x, maxx = hull[0].x, miny = hull[0].y, maxy = hull[0].y;
    for (const auto& p : hull) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(minx - eps)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(maxx + eps)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(miny - eps)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(maxy + eps)));

    ImagePlane filled(width, height, 0.0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const Point2 p{static_cast<double>(x), static_cast<double>(y)};
            bool inside = true;
            for (std::size_t i = 0; i < hull.size() && inside; ++i)
                inside = cross(hull[i], hull[(i + 1) % hull.size()], p) >= -eps;
            if (inside) filled(x, y) = 1.0;
        }

    std::vector<PixelCoord> disk;
    for (int dy = -dilation; dy <= dilation; ++dy)
        for (int dx = -dilation; dx <= dilation; ++dx)
            if (dx * dx + dy * dy <= dilation * dilation) disk.push_back({dx, dy});
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            if (filled(x, y) == 0.0) continue;
            for (const auto& d : disk)
                if (mask.contains(x + d.x, y + d.y)) mask(x + d.x, y + d.y) = 1.0;
        }
    return mask;
}

FacialMaskSet rasterize_masks(const LandmarkSet& lm, int width, int height) {
    return rasterize_masks(lm, width, height, layout_by_name(lm.layout));
}

FacialMaskSet rasterize_masks(const LandmarkSet& lm, int width, int height, const LandmarkLayout& layout) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("rasterize_masks: empty canvas");
    if (layout.point_count != 0 && static_cast<int>(lm.points.size()) != layout.point_count)
        throw std::invalid_argument("rasterize_masks: landmark count does not match layout '" + layout.name + "'");
    FacialMaskSet out;
    std::vector<Point2> pts = lm.points;
    for (auto& p : pts) {
        const Point2 c{std::clamp(p.x, 0.0, width - 1.0), std::clamp(p.y, 0.0, height - 1.0)};
        if (!(c == p)) ++out.clamped_points;
        p = c;
    }
    for (int c = 0; c < kComponentCount; ++c) {
        ImagePlane mask(width, height, 0.0);
        for (const auto& group : layout.groups[static_cast<std::size_t>(c)]) {
            std::vector<Point2> gp;
            for (int idx : group) {
                if (idx < 0 || idx >= static_cast<int>(pts.size()))
                    throw std::invalid_argument("rasterize_masks: layout index out of range");
                gp.push_back(pts[static_cast<std::size_t>(idx)]);
            }
            const ImagePlane part = rasterize_component(gp, width, height);
            bool any = false;
            for (std::size_t i = 0; i < part.size(); ++i)
                if (part.data()[i] != 0.0) {
                    mask.data()[i] = 1.0;
                    any = true;
                }
            if (!any)
                out.warnings.push_back(std::string(component_name(static_cast<FacialComponent>(c))) +
                                       ": degenerate landmark group (fewer than 3 non-collinear points)");
        }
        out.masks[static_cast<std::size_t>(c)] = std::move(mask);
    }
    return out;
}

ImagePlane shift_plane(const ImagePlane& img, int dx, int dy) {
    if (dx == 0 && dy == 0) return img;
    ImagePlane out(img.width(), img.height(), 0.0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            if (img.contains(x - dx, y - dy)) out(x, y) = img(x - dx, y - dy);
    return out;
}

FacialMaskSet perturb_masks(const FacialMaskSet& masks, double deviation, std::uint64_t seed) {
    if (deviation < 0) throw std::invalid_argument("perturb_masks: deviation must be >= 0");
    FacialMaskSet out = masks;
    Rng rng(seed);
    for (auto& m : out.masks) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const int dx = static_cast<int>(std::lround(deviation * std::cos(theta)));
        const int dy = static_cast<int>(std::lround(deviation * std::sin(theta)));
        m = shift_plane(m, dx, dy);
    }
    return out;
}

}  // namespace facerestore
