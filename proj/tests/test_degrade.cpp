#include <doctest.h>

#include <fstream>

#include "facerestore/degrade.hpp"
#include "oracles.hpp"

using namespace facerestore;

namespace {

std::pair<double, double> center_of_mass(const Kernel2D& k) {
    double sx = 0, sy = 0, s = 0;
    for (int y = 0; y < k.size(); ++y)
        for (int x = 0; x < k.size(); ++x) {
            sx += x * k(x, y);
            sy += y * k(x, y);
            s += k(x, y);
        }
    return {sx / s - k.radius(), sy / s - k.radius()};
}

bool all_non_negative(const Kernel2D& k) {
    return std::all_of(k.taps().begin(), k.taps().end(), [](double v) { return v >= 0.0; });
}

}  // namespace

TEST_CASE("motion kernels") {
    SUBCASE("forced horizontal walk gives a 1x3 line") {
        MotionWalkParams p;
        p.steps = 2;
        p.length_factor = 1.0;
        p.angle_noise = 0.0;
        p.initial_angle = 0.0;
        const Kernel2D k = gen_motion_kernel(3, 0, p);
        for (int x = 0; x < 3; ++x) {
            CHECK(k(x, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
            CHECK(k(x, 0) == 0.0);
            CHECK(k(x, 2) == 0.0);
        }
    }
    SUBCASE("every bank entry is a normalized, centred blur kernel") {
        for (int size : {11, 21, 31})
            for (const Kernel2D& k : motion_kernel_bank(size)) {
                CHECK(k.is_normalized(1e-6));
                CHECK(all_non_negative(k));
                const auto [cx, cy] = center_of_mass(k);
                CHECK(std::abs(cx) < 0.75);
                CHECK(std::abs(cy) < 0.75);
            }
    }
    SUBCASE("seed 42, size 11 matches the frozen kernel") {
        std::ifstream in(FIXTURE_DIR "/golden/motion_seed42_size11.txt");
        REQUIRE(in);
        int size = 0;
        in >> size;
        const Kernel2D k = gen_motion_kernel(11, 42);
        REQUIRE(size == 11);
        for (int y = 0; y < 11; ++y)
            for (int x = 0; x < 11; ++x) {
                double v = 0;
                in >> v;
                CHECK(k(x, y) == v);
            }
        CHECK(gen_motion_kernel(11, 42) == k);
        CHECK(!(gen_motion_kernel(11, 43) == k));
    }
    CHECK_THROWS_AS(gen_motion_kernel(10, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_motion_kernel(1, 1), std::invalid_argument);
}

TEST_CASE("gaussian kernels") {
    CHECK(gen_gaussian_kernel(11, 1e-3)(5, 5) >= 1.0 - 1e-6);
    const Kernel2D g = gen_gaussian_kernel(11, 1.5);
    double z = 0;
    for (int y = -5; y <= 5; ++y)
        for (int x = -5; x <= 5; ++x) z += std::exp(-(x * x + y * y) / (2 * 1.5 * 1.5));
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
            const double want = std::exp(-((x - 5) * (x - 5) + (y - 5) * (y - 5)) / (2 * 1.5 * 1.5)) / z;
            CHECK(std::abs(g(x, y) - want) <= 1e-9);
            CHECK(g(x, y) == g(10 - x, y));
            CHECK(g(x, y) == g(x, 10 - y));
            CHECK(g(x, y) == g(y, x));
        }
    const auto [cx, cy] = center_of_mass(g);
    CHECK(std::abs(cx) < 1e-12);
    CHECK(std::abs(cy) < 1e-12);
    CHECK_THROWS_AS(gen_gaussian_kernel(11, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gen_gaussian_kernel(11, -1.0), std::invalid_argument);
}

TEST_CASE("degrade") {
    Rng rng(9);
    const ImageStack hr({oracle::random_plane(rng, 32, 32), oracle::random_plane(rng, 32, 32),
                         oracle::random_plane(rng, 32, 32)},
                        ColorSpace::RGB);
    CHECK(degrade_with_kernel(hr, Kernel2D::identity(), 1) == hr);

    const ImageStack flat = ImageStack::from_luma(ImagePlane(32, 32, 0.25));
    DegradeSpec spec;
    spec.kernel_size = 21;
    const ImageStack small = degrade(flat, spec);
    CHECK(small.width() == 8);
    for (double v : small.channel(0).data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

    ImagePlane ramp(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) ramp(x, y) = (x + y) / 62.0;
    DegradeSpec g;
    g.kernel_kind = KernelKind::Gaussian;
    g.kernel_size = 11;
    g.gaussian_sigma = 1.5;
    const ImageStack got = degrade(ImageStack::from_luma(ramp), g);
    const ImagePlane blurred = oracle::convolve(ramp, gen_gaussian_kernel(11, 1.5));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(std::abs(got.channel(0)(x, y) - blurred(4 * x, 4 * y)) <= 1e-7);

    SUBCASE("seed changes motion kernels only") {
        DegradeSpec m;
        m.kernel_size = 15;
        DegradeSpec m2 = m;
        m2.rng_seed = 12345;
        CHECK(degrade(hr, m) == degrade(hr, m));
        CHECK(!(degrade(hr, m) == degrade(hr, m2)));
        DegradeSpec g2 = g;
        g2.rng_seed = 777;
        CHECK(degrade(hr, g) == degrade(hr, g2));
    }
    CHECK_THROWS_AS(degrade(ImageStack::from_luma(ImagePlane(30, 32)), spec), std::invalid_argument);
    spec.kernel_size = 33;
    CHECK_THROWS_AS(degrade(flat, spec), std::invalid_argument);
    spec.kernel_size = 9;
    CHECK_THROWS_AS(degrade(flat, spec), std::invalid_argument);
}

TEST_CASE("degradation parameters are drawn from the standard ranges") {
    Rng rng(3);
    bool saw_small = false, saw_large = false;
    for (int i = 0; i < 500; ++i) {
        const DegradeSpec s = sample_degrade_spec(rng, KernelKind::Motion);
        CHECK(s.kernel_size % 2 == 1);
        CHECK(s.kernel_size >= 11);
        CHECK(s.kernel_size <= 31);
        CHECK(s.gaussian_sigma >= 1.4);
        CHECK(s.gaussian_sigma <= 1.7);
        CHECK(s.scale_factor == 4);
        saw_small |= s.kernel_size == 11;
        saw_large |= s.kernel_size == 31;
        const int idx = motion_bank_index(s.rng_seed);
        CHECK(idx >= 0);
        CHECK(idx < kMotionBankSize);
    }
    CHECK(saw_small);
    CHECK(saw_large);
}
