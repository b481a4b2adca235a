#include <doctest.h>

#include <filesystem>

#include "facerestore/image.hpp"
#include "facerestore/image_io.hpp"
#include "oracles.hpp"

using namespace facerestore;

namespace {

double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

ImageStack random_rgb(Rng& rng, int w, int h) {
    return ImageStack({oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h)},
                      ColorSpace::RGB);
}

Kernel2D random_kernel(Rng& rng, int size) {
    std::vector<double> t(static_cast<std::size_t>(size) * size);
    double s = 0;
    for (double& v : t) s += v = rng.uniform();
    for (double& v : t) v /= s;
    return Kernel2D(size, t);
}

}  // namespace

TEST_CASE("image stack invariants") {
    CHECK_THROWS_AS(ImageStack({ImagePlane(2, 2), ImagePlane(3, 2), ImagePlane(2, 2)}, ColorSpace::RGB),
                    std::invalid_argument);
    CHECK_THROWS_AS(ImageStack({ImagePlane(2, 2)}, ColorSpace::RGB), std::invalid_argument);
    CHECK_THROWS_AS(ImageStack({ImagePlane(2, 2, 0.5)}, ColorSpace::Mask), std::invalid_argument);
    CHECK_NOTHROW(ImageStack({ImagePlane(2, 2, 1.0)}, ColorSpace::Mask));
    CHECK_THROWS_AS(Kernel2D(2, {0.25, 0.25, 0.25, 0.25}), std::invalid_argument);
}

TEST_CASE("bicubic resize") {
    Rng rng(1);
    SUBCASE("constant image stays constant") {
        const ImagePlane c(5, 7, 0.5);
        const ImagePlane up = bicubic_resize(c, {4, 1});
        CHECK(up.width() == 20);
        CHECK(up.height() == 28);
        CHECK(max_abs_diff(up, ImagePlane(20, 28, 0.5)) < 1e-15);
    }
    SUBCASE("scale 1 is the identity") {
        const ImagePlane p = oracle::random_plane(rng, 9, 6);
        CHECK(bicubic_resize(p, {1, 1}) == p);
        const ImagePlane up = bicubic_resize(p, {2, 1});
        CHECK(bicubic_resize(up, {1, 1}) == up);
    }
    SUBCASE("ramp matches the direct Keys evaluation") {
        ImagePlane ramp(8, 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) ramp(x, y) = (x + 2 * y) / 21.0;
        CHECK(max_abs_diff(bicubic_resize(ramp, {2, 1}), oracle::bicubic(ramp, 2, 1)) <= 1e-6);
    }
    SUBCASE("random images, several scales") {
        for (auto [n, d] : {std::pair{4, 1}, {3, 2}, {1, 4}, {2, 3}}) {
            const ImagePlane p = oracle::random_plane(rng, 11, 7);
            const ImagePlane got = bicubic_resize(p, {n, d});
            const ImagePlane want = oracle::bicubic(p, n, d);
            REQUIRE(got.same_shape(want));
            CHECK(max_abs_diff(got, want) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(bicubic_resize(ImagePlane(1, 1), {1, 4}), std::invalid_argument);
    CHECK_THROWS_AS(bicubic_resize(ImagePlane(4, 4), {0, 1}), std::invalid_argument);
}

TEST_CASE("convolution") {
    Rng rng(2);
    const ImagePlane img = oracle::random_plane(rng, 16, 16);
    CHECK(convolve(img, Kernel2D::identity()) == img);

    const Kernel2D k = random_kernel(rng, 5);
    CHECK(max_abs_diff(convolve(ImagePlane(9, 9, 0.3), k), ImagePlane(9, 9, 0.3)) < 1e-15);
    CHECK(max_abs_diff(convolve(img, k), oracle::convolve(img, k)) <= 1e-7);

    // Asymmetric kernel pins the orientation (true convolution, not correlation).
    const Kernel2D shift(3, {0, 0, 0, 1, 0, 0, 0, 0, 0});
    const ImagePlane s = convolve(img, shift);
    CHECK(s(5, 5) == img(6, 5));

    SUBCASE("linearity") {
        const ImagePlane y = oracle::random_plane(rng, 16, 16);
        const double a = 0.3, b = 0.6;
        ImagePlane mix(16, 16);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * img.data()[i] + b * y.data()[i];
        const ImagePlane lhs = convolve(mix, k);
        const ImagePlane cx = convolve(img, k), cy = convolve(y, k);
        double m = 0;
        for (std::size_t i = 0; i < lhs.size(); ++i)
            m = std::max(m, std::abs(lhs.data()[i] - (a * cx.data()[i] + b * cy.data()[i])));
        CHECK(m <= 1e-6);
    }
    CHECK_THROWS_AS(convolve(img, Kernel2D(3, {0, 0, 0, 0, 2, 0, 0, 0, 0})), std::invalid_argument);
    CHECK_THROWS_AS(convolve(img, Kernel2D(1, {-1.0})), std::invalid_argument);
}

TEST_CASE("box filter") {
    Rng rng(3);
    const ImagePlane p = oracle::random_plane(rng, 12, 9);
    CHECK(box_filter(p, 0) == p);
    CHECK(max_abs_diff(box_filter(p, 3), oracle::box(p, 3)) <= 1e-7);
    for (int r = 1; r <= 4; ++r) CHECK(max_abs_diff(box_filter(ImagePlane(7, 5, 0.7), r), ImagePlane(7, 5, 0.7)) < 1e-12);
    for (int w : {1, 5, 17, 32})
        for (int h : {1, 8, 32})
            for (int r = 0; r <= 5; ++r) {
                const ImagePlane q = oracle::random_plane(rng, w, h);
                CHECK(max_abs_diff(box_filter(q, r), oracle::box(q, r)) <= 1e-7);
            }
    CHECK_THROWS_AS(box_filter(p, -1), std::invalid_argument);
}

TEST_CASE("patch extraction") {
    ImagePlane ramp(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) ramp(x, y) = (x + 32 * y) / 1024.0;
    CHECK(extract_patch(ramp, {3, 3}, 1).values == std::vector<double>{ramp(3, 3)});
    const Patch p = extract_patch(ramp, {15, 12}, 20);
    REQUIRE(p.values.size() == 400);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) CHECK(p.values[static_cast<std::size_t>(y * 20 + x)] == ramp(5 + x, 2 + y));
    const Patch odd = extract_patch(ramp, {10, 10}, 5);
    CHECK(odd.values.front() == ramp(8, 8));
    CHECK_THROWS_AS(extract_patch(ramp, {0, 0}, 3), std::out_of_range);
    CHECK_THROWS_AS(extract_patch(ramp, {31, 31}, 20), std::out_of_range);
}

TEST_CASE("luminance") {
    const ImageStack gray({ImagePlane(2, 2, 0.4), ImagePlane(2, 2, 0.4), ImagePlane(2, 2, 0.4)}, ColorSpace::RGB);
    CHECK(rgb_to_luma(gray)(1, 1) == doctest::Approx(0.4).epsilon(1e-15));
    const ImageStack red({ImagePlane(1, 1, 1.0), ImagePlane(1, 1, 0.0), ImagePlane(1, 1, 0.0)}, ColorSpace::RGB);
    CHECK(rgb_to_luma(red)(0, 0) == doctest::Approx(0.299).epsilon(1e-15));

    Rng rng(4);
    const ImageStack img = random_rgb(rng, 6, 5);
    const ImageStack back = luma_recombine(rgb_to_luma(img), img);
    for (int c = 0; c < 3; ++c) CHECK(max_abs_diff(back.channel(c), img.channel(c)) <= 1e-6);

    // Raising the luminance shifts every channel equally.
    ImagePlane l = rgb_to_luma(gray);
    for (double& v : l.data()) v += 0.1;
    CHECK(luma_recombine(l, gray).channel(2)(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(luma_recombine(ImagePlane(3, 3), gray), std::invalid_argument);
}

TEST_CASE("image files round-trip") {
    Rng rng(5);
    const auto dir = std::filesystem::temp_directory_path() / "facerestore_test_io";
    std::filesystem::create_directories(dir);
    const ImageStack rgb = quantize_8bit(random_rgb(rng, 7, 5));
    for (const char* ext : {".png", ".ppm"}) {
        save_image(rgb, dir / (std::string("rgb") + ext));
        CHECK(load_image(dir / (std::string("rgb") + ext)) == rgb);
    }
    const ImageStack gray = quantize_8bit(ImageStack::from_luma(oracle::random_plane(rng, 5, 7)));
    for (const char* ext : {".png", ".pgm"}) {
        save_image(gray, dir / (std::string("gray") + ext));
        const ImageStack back = load_image(dir / (std::string("gray") + ext));
        CHECK(back.color_space() == ColorSpace::Luma);
        CHECK(back == gray);
    }
    CHECK_THROWS_AS(load_image(dir / "missing.png"), DataError);
    CHECK_THROWS_AS(save_image(rgb, dir / "x.pgm"), std::invalid_argument);
}
