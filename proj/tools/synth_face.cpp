#include "synth_face.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "facerestore/rng.hpp"

namespace facesynth {

using facerestore::Point2;

namespace {

using Rgb = std::array<double, 3>;

struct Ellipse {
    double cx, cy, rx, ry;
    double value(double x, double y) const {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        return dx * dx + dy * dy;
    }
    bool inside(double x, double y) const { return value(x, y) <= 1.0; }
    Point2 at(double t) const { return {cx + rx * std::cos(t), cy + ry * std::sin(t)}; }
};

struct Brow {
    double x0, x1, y, lift, thick;
    // Vertical arc centre at x; parabola through the ends, peak in the middle.
    double centre_y(double x) const {
        const double t = (x - x0) / (x1 - x0);
        return y - lift * 4.0 * t * (1.0 - t);
    }
    bool inside(double x, double y_) const {
        if (x < x0 || x > x1) return false;
        const double t = (x - x0) / (x1 - x0);
        const double half = thick * (0.6 + 0.4 * std::sin(std::numbers::pi * t));
        return std::abs(y_ - centre_y(x)) <= half;
    }
};

struct Face {
    double w, h;
    Rgb bg_top, bg_bottom, hair, skin, sclera, iris, lips, dark;
    Ellipse head, hairline, eye[2], iris_e[2], mouth, nostril[2];
    Brow brow[2];
    double light, nose_top, nose_tip, nose_half, mouth_gap;

    Rgb shade(Rgb c, double x, double y) const {
        const double f = 1.0 + light * (x - head.cx) / head.rx - 0.08 * (y - head.cy) / head.ry;
        return {c[0] * f, c[1] * f, c[2] * f};
    }

    Rgb color_at(double x, double y) const {
        const double t = y / h;
        Rgb c{bg_top[0] + (bg_bottom[0] - bg_top[0]) * t, bg_top[1] + (bg_bottom[1] - bg_top[1]) * t,
              bg_top[2] + (bg_bottom[2] - bg_top[2]) * t};
        if (hairline.inside(x, y)) c = shade(hair, x, y);
        if (!head.inside(x, y)) return c;
        if (y < hairline.cy - hairline.ry * 0.35 && hairline.inside(x, y)) return shade(hair, x, y);

        // Skin with a soft cheek falloff towards the silhouette.
        const double edge = head.value(x, y);
        Rgb s = shade(skin, x, y);
        const double fall = 1.0 - 0.18 * edge * edge;
        c = {s[0] * fall, s[1] * fall, s[2] * fall};

        for (const auto& b : brow)
            if (b.inside(x, y)) c = shade(hair, x, y);
        for (int i = 0; i < 2; ++i) {
            if (eye[i].inside(x, y)) {
                c = sclera;
                if (iris_e[i].inside(x, y)) c = iris;
                if (iris_e[i].value(x, y) < 0.25) c = dark;
                // Upper lid line.
                if (eye[i].value(x, y) > 0.6 && y < eye[i].cy) c = {dark[0] * 1.5, dark[1] * 1.5, dark[2] * 1.5};
            }
        }
        // Nose: shaded sides of the bridge and a darker base.
        if (y >= nose_top && y <= nose_tip) {
            const double span = (y - nose_top) / (nose_tip - nose_top);
            const double half = nose_half * (0.45 + 0.55 * span);
            const double d = std::abs(std::abs(x - head.cx) - half);
            if (d < 0.8) {
                const double k = 0.78 + 0.1 * (1.0 - span);
                c = {c[0] * k, c[1] * k, c[2] * k};
            }
        }
        for (const auto& n : nostril)
            if (n.inside(x, y)) c = {dark[0] * 2.0, dark[1] * 2.0, dark[2] * 2.0};
        if (mouth.inside(x, y)) {
            c = shade(lips, x, y);
            const double gap = mouth.ry * mouth_gap * (1.0 - std::pow((x - mouth.cx) / mouth.rx, 2));
            if (std::abs(y - mouth.cy) < 0.35 + gap) c = dark;
        }
        return c;
    }
};

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

SynthFace make_face(std::uint64_t seed, int width, int height) {
    facerestore::Rng rng(seed ^ 0x5eedface0000ULL);
    Face f;
    f.w = width;
    f.h = height;
    const double sx = width / 64.0, sy = height / 64.0;

    const double bg = rng.uniform(0.15, 0.55);
    f.bg_top = {bg * rng.uniform(0.8, 1.2), bg * rng.uniform(0.8, 1.2), bg * rng.uniform(0.8, 1.2)};
    const double bg2 = rng.uniform(0.1, 0.5);
    f.bg_bottom = {bg2, bg2 * rng.uniform(0.85, 1.15), bg2 * rng.uniform(0.85, 1.15)};
    const double hv = rng.uniform(0.05, 0.35);
    f.hair = {hv * rng.uniform(1.0, 1.5), hv * rng.uniform(0.8, 1.1), hv * rng.uniform(0.6, 0.9)};
    const double tone = rng.uniform(0.5, 0.88);
    f.skin = {tone, tone * rng.uniform(0.72, 0.85), tone * rng.uniform(0.58, 0.72)};
    f.sclera = {0.88, 0.86, 0.84};
    const double iv = rng.uniform(0.15, 0.45);
    f.iris = {iv * rng.uniform(0.6, 1.2), iv * rng.uniform(0.7, 1.2), iv * rng.uniform(0.7, 1.4)};
    f.dark = {0.07, 0.05, 0.05};
    f.lips = {std::min(1.0, tone * 0.95 + 0.08), tone * 0.5, tone * 0.45};
    f.light = rng.uniform(-0.15, 0.15);

    const double cx = (32 + rng.uniform(-1.5, 1.5)) * sx;
    const double cy = (34 + rng.uniform(-1.5, 1.5)) * sy;
    f.head = {cx, cy, rng.uniform(19, 22) * sx, rng.uniform(24, 27) * sy};
    f.hairline = {cx, cy - f.head.ry * 0.25, f.head.rx + rng.uniform(1.0, 3.0) * sx, f.head.ry * 0.85};

    const double eye_y = cy - f.head.ry * rng.uniform(0.1, 0.2);
    const double eye_dx = f.head.rx * rng.uniform(0.38, 0.46);
    const double erx = rng.uniform(3.6, 4.6) * sx, ery = rng.uniform(1.8, 2.4) * sy;
    const double iris_r = rng.uniform(1.4, 1.9);
    const double gaze = rng.uniform(-0.6, 0.6);
    const double brow_gap = rng.uniform(4.5, 6.0) * sy;
    const double brow_lift = rng.uniform(0.5, 1.8) * sy;
    const double brow_thick = rng.uniform(0.9, 1.5) * sy;
    for (int i = 0; i < 2; ++i) {
        const double ex = cx + (i == 0 ? -eye_dx : eye_dx);
        f.eye[i] = {ex, eye_y, erx, ery};
        f.iris_e[i] = {ex + gaze * sx, eye_y, iris_r * sx, std::min(iris_r * sy, ery * 0.95)};
        f.brow[i] = {ex - erx - 1.0 * sx, ex + erx + 1.0 * sx, eye_y - brow_gap, brow_lift, brow_thick};
    }
    f.nose_top = eye_y + 1.0 * sy;
    f.nose_tip = cy + f.head.ry * rng.uniform(0.14, 0.22);
    f.nose_half = rng.uniform(2.4, 3.4) * sx;
    for (int i = 0; i < 2; ++i)
        f.nostril[i] = {cx + (i == 0 ? -1 : 1) * f.nose_half * 0.75, f.nose_tip, 1.1 * sx, 0.75 * sy};
    f.mouth = {cx + rng.uniform(-0.5, 0.5) * sx, cy + f.head.ry * rng.uniform(0.42, 0.52), rng.uniform(6.0, 8.0) * sx,
               rng.uniform(2.0, 2.9) * sy};
    f.mouth_gap = rng.uniform(0.0, 0.25);

    // 4x4 supersampling; pixel (x, y) is centred at integer coordinates.
    std::vector<facerestore::ImagePlane> ch(3, facerestore::ImagePlane(width, height));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            Rgb acc{0, 0, 0};
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 4; ++i) {
                    const Rgb c = f.color_at(x - 0.375 + 0.25 * i, y - 0.375 + 0.25 * j);
                    for (int k = 0; k < 3; ++k) acc[static_cast<std::size_t>(k)] += c[static_cast<std::size_t>(k)];
                }
            for (int k = 0; k < 3; ++k) ch[static_cast<std::size_t>(k)](x, y) = clamp01(acc[static_cast<std::size_t>(k)] / 16.0);
        }

    SynthFace out{facerestore::ImageStack(std::move(ch), facerestore::ColorSpace::RGB), {}};
    auto& p = out.landmarks.points;
    p.resize(68);
    const double pi = std::numbers::pi;
    // Jaw 0-16: left ear height, under the chin, right ear height.
    for (int i = 0; i <= 16; ++i) p[static_cast<std::size_t>(i)] = f.head.at(pi - i * pi / 16.0);
    // Eyebrows 17-21 (left, outer to inner) and 22-26 (right, inner to outer).
    for (int i = 0; i < 5; ++i) {
        const Brow& l = f.brow[0];
        const double xl = l.x0 + (l.x1 - l.x0) * i / 4.0;
        p[static_cast<std::size_t>(17 + i)] = {xl, l.centre_y(xl)};
        const Brow& r = f.brow[1];
        const double xr = r.x0 + (r.x1 - r.x0) * i / 4.0;
        p[static_cast<std::size_t>(22 + i)] = {xr, r.centre_y(xr)};
    }
    // Nose bridge 27-30, base 31-35.
    for (int i = 0; i < 4; ++i)
        p[static_cast<std::size_t>(27 + i)] = {cx, f.nose_top + (f.nose_tip - f.nose_top) * i / 3.0};
    for (int i = 0; i < 5; ++i)
        p[static_cast<std::size_t>(31 + i)] = {cx + f.nose_half * (i - 2) / 2.0, f.nose_tip + (i == 2 ? 1.0 : 0.6) * sy};
    // Eyes 36-41 and 42-47: outer/inner corners plus two upper and two lower lid points.
    for (int e = 0; e < 2; ++e) {
        const Ellipse& el = f.eye[e];
        const std::array<double, 6> angles = {pi, 1.25 * pi, 1.75 * pi, 0.0, 0.25 * pi, 0.75 * pi};
        for (int i = 0; i < 6; ++i) p[static_cast<std::size_t>(36 + 6 * e + i)] = el.at(angles[static_cast<std::size_t>(i)]);
    }
    // Mouth outer 48-59 from the left corner over the upper lip; inner 60-67.
    for (int i = 0; i < 12; ++i) p[static_cast<std::size_t>(48 + i)] = f.mouth.at(pi + i * 2.0 * pi / 12.0);
    const Ellipse inner{f.mouth.cx, f.mouth.cy, f.mouth.rx * 0.75, std::max(0.6, f.mouth.ry * (0.3 + f.mouth_gap))};
    for (int i = 0; i < 8; ++i) p[static_cast<std::size_t>(60 + i)] = inner.at(pi + i * 2.0 * pi / 8.0);
    for (auto& q : p) {
        q.x = std::clamp(q.x, 0.0, width - 1.0);
        q.y = std::clamp(q.y, 0.0, height - 1.0);
    }
    return out;
}

}  // namespace facesynth
