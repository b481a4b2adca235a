// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "facerestore/detail_transfer.hpp"
#include "facerestore/exemplar.hpp"
#include "facerestore/fsgn.hpp"
#include "facerestore/metrics.hpp"
#include "facerestore/pipeline.hpp"
#include "oracles.hpp"

using namespace facerestore;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FIXTURE_DIR;

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Outcome ridge() {
    Rng rng(101);
    const int k = 5, n = 400;
    double worst = 0;
    const auto t0 = Clock::now();
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::vector<double>> h(k);
        for (auto& c : h)
            for (int p = 0; p < n; ++p) c.push_back(rng.uniform());
        std::vector<double> target;
        for (int p = 0; p < n; ++p) target.push_back(rng.uniform());
        const double lambda = rng.uniform(1.0, 800.0);
        const auto f = solve_regression(h, target, lambda);
        const auto g = oracle::ridge_cg(h, target, lambda);
        for (int i = 0; i < k; ++i) worst = std::max(worst, std::abs(f[static_cast<std::size_t>(i)] - g[static_cast<std::size_t>(i)]));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 10.0,
            "1000 instances K=5 side 20, max |dF| " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome guided() {
    Rng rng(102);
    const int radii[] = {1, 2, 4};
    const double eps[] = {1e-4, 1e-2};
    double worst = 0;
    double secs = 0;
    for (int t = 0; t < 50; ++t) {
        const int w = rng.uniform_int(9, 32), h = rng.uniform_int(9, 32);
        const ImagePlane p = oracle::random_plane(rng, w, h), g = oracle::random_plane(rng, w, h);
        const int r = radii[t % 3];
        const double e = eps[(t / 3) % 2];
        const auto t0 = Clock::now();
        const ImagePlane q = guided_filter(p, g, {r, e});
        secs += seconds_since(t0);
        const ImagePlane want = oracle::guided_filter(p, g, r, e);
        for (std::size_t i = 0; i < q.size(); ++i) worst = std::max(worst, std::abs(q.data()[i] - want.data()[i]));
    }
    return {worst <= 1e-7 && secs < 5.0,
            "50 fixtures, max diff " + fmt("%.2e", worst) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome identity() {
    Rng rng(103);
    int exact = 0;
    for (int t = 0; t < 20; ++t) {
        const int w = rng.uniform_int(12, 48), h = rng.uniform_int(12, 48);
        const ImageStack x({oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h)},
                           ColorSpace::RGB);
        const auto r = transfer_details_full(x, x, {});
        if (r.luma == rgb_to_luma(x) && r.output == x) ++exact;
    }
    return {exact == 20, std::to_string(exact) + "/20 fixtures bit-exact"};
}

Outcome knn() {
    Rng rng(104);
    const int side = 7, radius = 4, w = 28;
    int agree = 0;
    std::string first_bad;
    for (int f = 0; f < 20; ++f) {
        std::vector<ImagePlane> ex;
        for (int i = 0; i < 3; ++i) ex.push_back(oracle::random_plane(rng, w, w));
        if (f % 4 == 1) ex[2] = ex[0];
        if (f % 4 == 2)
            for (int y = 0; y < w; ++y)
                for (int x = 3; x < w; ++x) ex[1](x, y) = ex[1](x - 3, y);
        if (f % 4 == 3) ex[1] = ex[0], ex[2] = ex[0];
        const ImagePlane base = oracle::random_plane(rng, w, w);
        std::vector<ImageStack> imgs;
        for (const auto& e : ex) imgs.push_back(ImageStack::from_luma(e));
        const auto db = ExemplarDB::build(imgs, {side, radius, RegressionSource::Matched, 1.5});
        const PixelCoord c{rng.uniform_int(3, w - 4), rng.uniform_int(3, w - 4)};
        MatchParams mp;
        mp.patch_side = side;
        mp.k = 3;
        mp.alpha = 0.5;
        const auto got = knn_search(db, base, c, mp);
        const auto want = oracle::knn(ex, base, c, side, radius, 3, 0.5);
        bool ok = got.size() == want.size();
        for (std::size_t i = 0; ok && i < got.size(); ++i)
            ok = got[i].exemplar == want[i].exemplar && got[i].center == want[i].center &&
                 std::abs(got[i].distance - want[i].distance) <= 1e-12;
        if (ok) ++agree;
        else if (first_bad.empty()) first_bad = ", first mismatch fixture " + std::to_string(f);
    }
    return {agree == 20, std::to_string(agree) + "/20 fixtures (3 exemplars, ties included) agree" + first_bad};
}

Outcome dilated() {
    Rng rng(105);
    double worst = 0;
    for (int d = 1; d <= 5; ++d) {
        ConvLayer l{{"t", 4, 4, 3, d, d, true, d % 2 ? Activation::Relu : Activation::None}, {}, {}};
        for (int i = 0; i < 4 * 4 * 9; ++i) l.weights.push_back(static_cast<float>(rng.uniform(-0.5, 0.5)));
        for (int i = 0; i < 4; ++i) l.bias.push_back(static_cast<float>(rng.uniform(-0.2, 0.2)));
        FeatureMap in(4, 16, 16);
        for (float& v : in.data()) v = static_cast<float>(rng.uniform());
        const FeatureMap out = dilated_conv(in, l);
        const auto want = oracle::dilated_conv(in, l);
        for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(out.data()[i] - want[i]));
    }
    FsgnModel zero = build_fsgn_spec();
    const int convs = zero.conv_count(), blocks = zero.residual_block_count();
    init_constant(zero, 0.0f);
    ImageStack rgb({oracle::random_plane(rng, 16, 16), oracle::random_plane(rng, 16, 16), oracle::random_plane(rng, 16, 16)},
                   ColorSpace::RGB);
    FacialMaskSet masks;
    for (auto& m : masks.masks) m = ImagePlane(16, 16, 0.0);
    const bool ident = fsgn_forward(zero, rgb, masks) == rgb;
    return {worst <= 1e-6 && ident && convs == 53 && blocks == 25,
            "dilations 1-5 max diff " + fmt("%.2e", worst) + ", zero-weight identity " + (ident ? "yes" : "no") +
                ", convs " + std::to_string(convs) + ", blocks " + std::to_string(blocks)};
}

FsgnModel toy_model() { return load_weights(kFixtures / "fsgn_toy.fsgn"); }

// Patch and search sizes scaled down to the 64 px fixture faces.
PipelineConfig desk_config() {
    PipelineConfig c;
    c.match.patch_side = c.exemplar.patch_side = 6;
    c.exemplar.search_radius = 3;
    return c;
}

double mean_of(const std::vector<ImageScores>& s, double ImageScores::*field) {
    double t = 0;
    for (const auto& x : s) t += x.*field;
    return t / static_cast<double>(s.size());
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    const auto samples = load_dataset(kFixtures / "faces");
    const auto scores = evaluate_dataset(toy_model(), samples, desk_config());
    const double secs = seconds_since(t0);
    const double bic = mean_of(scores, &ImageScores::psnr_bicubic);
    const double base = mean_of(scores, &ImageScores::psnr_base);
    const double full = mean_of(scores, &ImageScores::psnr_full);
    return {samples.size() == 10 && full - bic >= 0.5 && full >= base && secs < 300.0,
            std::to_string(samples.size()) + " faces, PSNR bicubic " + fmt("%.3f", bic) + " base " + fmt("%.3f", base) +
                " full " + fmt("%.3f", full) + " dB (full - bicubic " + fmt("%+.3f", full - bic) + "), " +
                fmt("%.1f", secs) + " s"};
}

Outcome mask_trend() {
    const auto samples = load_dataset(kFixtures / "faces");
    PipelineConfig cfg = desk_config();
    cfg.seed = 7;
    const auto rows = ablate(toy_model(), samples, cfg, AblationAxis::MaskDeviation, {0, 6, 10});
    const bool ok = rows.size() == 3 && rows[1].psnr <= rows[0].psnr && rows[2].psnr <= rows[1].psnr &&
                    rows[2].psnr < rows[0].psnr;
    std::string detail = "PSNR at deviation";
    for (const auto& r : rows) detail += " " + fmt("%g", r.value) + ": " + fmt("%.4f", r.psnr);
    return {ok, detail};
}

Outcome metrics() {
    Rng rng(106);
    double worst_psnr = 0, worst_ssim = 0;
    bool self_one = true;
    for (int t = 0; t < 20; ++t) {
        const int w = rng.uniform_int(11, 40), h = rng.uniform_int(11, 40);
        const ImageStack a({oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h), oracle::random_plane(rng, w, h)},
                           ColorSpace::RGB);
        std::vector<ImagePlane> bc = a.channels();
        for (auto& p : bc)
            for (double& v : p.data()) v = std::clamp(v + rng.uniform(-0.1, 0.1), 0.0, 1.0);
        const ImageStack b(bc, ColorSpace::RGB);
        worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b) - oracle::psnr(a, b)));
        worst_ssim = std::max(worst_ssim, std::abs(ssim(a.channel(0), b.channel(0)) - oracle::ssim(a.channel(0), b.channel(0))));
        self_one = self_one && ssim(a.channel(1), a.channel(1)) == 1.0;
    }
    const ImageStack a({oracle::random_plane(rng, 32, 32, 0, 0.9)}, ColorSpace::Luma);
    ImagePlane shifted = a.channel(0);
    for (double& v : shifted.data()) v += 16.0 / 255.0;
    const double offset = psnr(a, ImageStack::from_luma(shifted));
    const double closed = 10.0 * std::log10(255.0 * 255.0 / 256.0);
    const bool ok = worst_psnr <= 1e-9 && worst_ssim <= 1e-6 && self_one && std::abs(offset - closed) <= 1e-3;
    return {ok, "psnr max diff " + fmt("%.2e", worst_psnr) + " dB, ssim max diff " + fmt("%.2e", worst_ssim) +
                    ", ssim(x,x)=1 " + (self_one ? "yes" : "no") + ", 16/255 offset " + fmt("%.4f", offset) +
                    " dB (closed form " + fmt("%.4f", closed) + ")"};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"ridge regression optimality", ridge},
        {"guided filter oracle", guided},
        {"detail transfer identity", identity},
        {"k-nn oracle", knn},
        {"dilated convolution oracle", dilated},
        {"end-to-end directional", end_to_end},
        {"mask deviation trend", mask_trend},
        {"metrics oracles", metrics},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed ? 1 : 0;
}
