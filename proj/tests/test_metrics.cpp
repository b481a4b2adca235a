#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "facerestore/metrics.hpp"
#include "facerestore/tensor_io.hpp"
#include "oracles.hpp"
#include "synth_face.hpp"

using namespace facerestore;
namespace fs = std::filesystem;

namespace {

ImageStack random_rgb(Rng& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    return ImageStack({oracle::random_plane(rng, w, h, lo, hi), oracle::random_plane(rng, w, h, lo, hi),
                       oracle::random_plane(rng, w, h, lo, hi)},
                      ColorSpace::RGB);
}

ImageStack luma2x2(double a, double b, double c, double d) {
    return ImageStack::from_luma(ImagePlane(2, 2, std::vector<double>{a, b, c, d}));
}

ImageStack add_noise(const ImageStack& img, Rng& rng, double amp) {
    std::vector<ImagePlane> ch = img.channels();
    for (auto& p : ch)
        for (double& v : p.data()) v += rng.uniform(-amp, amp);
    return ImageStack(std::move(ch), img.color_space());
}

}  // namespace

TEST_CASE("psnr of identical images is infinite") {
    Rng rng(1);
    const auto a = random_rgb(rng, 8, 8);
    CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
}

TEST_CASE("psnr of a uniform 16/255 offset is the closed form") {
    Rng rng(2);
    const auto a = random_rgb(rng, 16, 16, 0.0, 0.9);
    std::vector<ImagePlane> ch = a.channels();
    for (auto& p : ch)
        for (double& v : p.data()) v += 16.0 / 255.0;
    const double want = 10.0 * std::log10(255.0 * 255.0 / (16.0 * 16.0));
    CHECK(want == doctest::Approx(24.0484).epsilon(1e-5));
    CHECK(std::abs(psnr(a, ImageStack(ch, ColorSpace::RGB)) - want) <= 1e-9);
}

TEST_CASE("psnr matches the direct-sum oracle and is symmetric") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_rgb(rng, 13, 9), b = random_rgb(rng, 13, 9);
        CHECK(std::abs(psnr(a, b) - oracle::psnr(a, b)) <= 1e-9);
        CHECK(psnr(a, b) == psnr(b, a));
    }
    CHECK_THROWS_AS(psnr(random_rgb(rng, 4, 4), random_rgb(rng, 4, 5)), std::invalid_argument);
}

TEST_CASE("psnr falls as noise grows") {
    Rng rng(4);
    const auto a = random_rgb(rng, 32, 32, 0.2, 0.8);
    double prev = std::numeric_limits<double>::infinity();
    for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
        const double p = psnr(a, add_noise(a, rng, amp));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim matches the per-window oracle") {
    Rng rng(5);
    for (int t = 0; t < 6; ++t) {
        const ImagePlane a = oracle::random_plane(rng, 24, 19);
        ImagePlane b = a;
        for (double& v : b.data()) v = std::clamp(v + rng.uniform(-0.2, 0.2), 0.0, 1.0);
        CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) <= 1e-6);
        CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    }
    const auto fa = facesynth::make_face(3).image, fb = facesynth::make_face(4).image;
    CHECK(std::abs(ssim(fa, fb) - oracle::ssim(rgb_to_luma(fa), rgb_to_luma(fb))) <= 1e-6);
}

TEST_CASE("ssim of an image with itself is one") {
    Rng rng(6);
    const ImagePlane a = oracle::random_plane(rng, 20, 20);
    CHECK(ssim(a, a) == 1.0);
    const ImagePlane flat(12, 12, 0.3);
    CHECK(ssim(flat, flat) == 1.0);
    const auto face = facesynth::make_face(8).image;
    CHECK(ssim(face, face) == 1.0);
}

TEST_CASE("ssim of an inverted noise image is low") {
    Rng rng(7);
    const ImagePlane a = oracle::random_plane(rng, 32, 32, 0.4, 0.6);
    ImagePlane b = a;
    for (double& v : b.data()) v = 1.0 - v;
    CHECK(ssim(a, b) < 0.1);
}

TEST_CASE("ssim rejects small or mismatched images") {
    CHECK_THROWS_AS(ssim(ImagePlane(10, 20), ImagePlane(10, 20)), std::invalid_argument);
    CHECK_THROWS_AS(ssim(ImagePlane(12, 12), ImagePlane(12, 13)), std::invalid_argument);
}

TEST_CASE("projector on a hand-computed 2x2 set") {
    // Centred rows (0.2,0.1,0,0), (-0.2,0.1,0,0), (0,-0.2,0,0): scatter diag(0.08, 0.06).
    const std::vector<ImageStack> train{luma2x2(0.7, 0.6, 0.5, 0.5), luma2x2(0.3, 0.6, 0.5, 0.5),
                                        luma2x2(0.5, 0.3, 0.5, 0.5)};
    const auto p = build_projector(train);
    REQUIRE(p.dims() == 2);
    const std::vector<double> want_basis{1, 0, 0, 0, 0, 1, 0, 0};
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(p.basis[k] - want_basis[k]) <= 1e-12);
    for (double m : p.mean) CHECK(m == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.eigenvalues[0] == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(p.eigenvalues[1] == doctest::Approx(0.03).epsilon(1e-12));

    const auto r = luma2x2(0.8, 0.6, 0.55, 0.5), g = luma2x2(0.6, 0.8, 0.5, 0.7);
    const auto cr = p.project(r);
    CHECK(cr[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(cr[1] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(identity_similarity(r, g, p) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(identity_similarity(g, r, p) == identity_similarity(r, g, p));
    CHECK(identity_similarity(luma2x2(0.5, 0.5, 0.1, 0.9), g, p) == 0.0);
}

TEST_CASE("projector basis is orthonormal and similarity is scale invariant") {
    std::vector<ImageStack> train;
    for (std::uint64_t s = 0; s < 30; ++s) train.push_back(facesynth::make_face(500 + s, 32, 32).image);
    const auto p = build_projector(train);
    CHECK(p.dims() == 29);
    const std::size_t d = p.mean.size();
    double worst = 0;
    for (int i = 0; i < p.dims(); ++i)
        for (int j = 0; j < p.dims(); ++j) {
            double s = 0;
            for (std::size_t k = 0; k < d; ++k) s += p.basis[i * d + k] * p.basis[j * d + k];
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    CHECK(worst <= 1e-6);
    for (int i = 1; i < p.dims(); ++i) CHECK(p.eigenvalues[static_cast<std::size_t>(i) - 1] >= p.eigenvalues[static_cast<std::size_t>(i)]);
    CHECK(build_projector(train, 5).dims() == 5);

    const auto gt = facesynth::make_face(900, 32, 32).image;
    CHECK(identity_similarity(gt, gt, p) == doctest::Approx(1.0).epsilon(1e-9));
    ImagePlane half = rgb_to_luma(gt);
    for (std::size_t k = 0; k < half.size(); ++k) half.data()[k] = p.mean[k] + 0.5 * (half.data()[k] - p.mean[k]);
    CHECK(identity_similarity(ImageStack::from_luma(half), gt, p) == doctest::Approx(1.0).epsilon(1e-9));
    const auto other = facesynth::make_face(901, 32, 32).image;
    CHECK(identity_similarity(other, gt, p) == identity_similarity(gt, other, p));
    CHECK(identity_similarity(other, gt, p) < 1.0);
}

TEST_CASE("projector errors and serialization") {
    CHECK_THROWS_AS(build_projector({luma2x2(0, 0, 0, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(build_projector({luma2x2(0, 0, 0, 0), ImageStack::from_luma(ImagePlane(3, 2))}),
                    std::invalid_argument);
    std::vector<ImageStack> train;
    for (std::uint64_t s = 0; s < 6; ++s) train.push_back(facesynth::make_face(700 + s, 16, 16).image);
    const auto p = build_projector(train);
    CHECK_THROWS_AS(p.project(facesynth::make_face(1, 16, 17).image), std::invalid_argument);

    const fs::path file = fs::temp_directory_path() / "fr_projector.t";
    save_projector(p, file);
    const auto q = load_projector(file);
    CHECK(q.width == 16);
    CHECK(q.height == 16);
    REQUIRE(q.dims() == p.dims());
    for (std::size_t k = 0; k < p.basis.size(); ++k) CHECK(std::abs(q.basis[k] - p.basis[k]) <= 1e-6);
    const auto gt = facesynth::make_face(710, 16, 16).image, r = facesynth::make_face(711, 16, 16).image;
    CHECK(identity_similarity(r, gt, q) == doctest::Approx(identity_similarity(r, gt, p)).epsilon(1e-5));

    write_tensor_file(file, {{"mean", {4}, {0, 0, 0, 0}}});
    CHECK_THROWS_AS(load_projector(file), TensorFileError);
    fs::remove(file);
}
