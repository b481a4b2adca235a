#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "facerestore/degrade.hpp"
#include "facerestore/errors.hpp"
#include "facerestore/face_masks.hpp"
#include "facerestore/fsgn.hpp"
#include "facerestore/image_io.hpp"
#include "facerestore/metrics.hpp"
#include "facerestore/pipeline.hpp"

namespace fs = std::filesystem;
using namespace facerestore;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kInternal = 4 };

struct Options {
    std::string input, output, landmarks, weights, exemplars, cache_dir, intermediates, stage = "full";
    std::string kernel = "motion", lambda = "auto", axis, values, dataset, results, gt, projector, projector_from;
    int kernel_size = 11, scale = 4, patch_side = 20, k = 5, search_radius = 10, stride = 1, gf_radius = 8;
    int width = 0, height = 0, count = kMotionBankSize;
    double sigma = 1.5, alpha = 0.5, gf_eps = 1e-3, mask_deviation = 0.0;
    std::uint64_t seed = 0;
    bool random_spec = false, smoothed = false;
};

PipelineConfig make_config(const Options& o) {
    PipelineConfig c;
    c.weights = o.weights;
    c.exemplar_dir = o.exemplars;
    if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
    c.match.alpha = o.alpha;
    c.match.k = o.k;
    c.match.patch_side = o.patch_side;
    c.match.stride = o.stride;
    if (o.lambda != "auto") {
        try {
            std::size_t used = 0;
            c.match.lambda = std::stod(o.lambda, &used);
            if (used != o.lambda.size()) throw std::invalid_argument(o.lambda);
        } catch (const std::exception&) {
            throw ConfigError("--lambda must be 'auto' or a number, got '" + o.lambda + "'");
        }
    }
    c.exemplar.patch_side = o.patch_side;
    c.exemplar.search_radius = o.search_radius;
    c.exemplar.source = o.smoothed ? RegressionSource::SmoothedToSharp : RegressionSource::Matched;
    c.guided.radius = o.gf_radius;
    c.guided.epsilon = o.gf_eps;
    c.scale = o.scale;
    c.mask_deviation = o.mask_deviation;
    c.seed = o.seed;
    c.stage = parse_stage(o.stage);
    return c;
}

void require(const std::string& v, const char* flag) {
    if (v.empty()) throw ConfigError(std::string("missing required option ") + flag);
}

FsgnModel load_model(const std::string& path) {
    require(path, "--weights");
    if (!fs::exists(path))
        throw ConfigError("weights file not found: " + path + " (train one or use tests/fixtures/fsgn_toy.fsgn)");
    return load_weights(path);
}

std::vector<double> parse_values(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + tok + "'");
        }
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

int cmd_degrade(const Options& o) {
    require(o.input, "--input");
    require(o.output, "--output");
    const ImageStack hr = load_image(o.input);
    DegradeSpec spec;
    const KernelKind kind = o.kernel == "motion"     ? KernelKind::Motion
                            : o.kernel == "gaussian" ? KernelKind::Gaussian
                                                     : throw ConfigError("--kernel must be motion or gaussian");
    if (o.random_spec) {
        Rng rng(o.seed);
        spec = sample_degrade_spec(rng, kind, o.scale);
    } else {
        spec.kernel_kind = kind;
        spec.kernel_size = o.kernel_size;
        spec.gaussian_sigma = o.sigma;
        spec.scale_factor = o.scale;
        spec.rng_seed = o.seed;
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    save_image(degrade(hr, spec), o.output);
    std::cerr << "kernel " << o.kernel << " size " << spec.kernel_size << " sigma " << spec.gaussian_sigma
              << " seed " << spec.rng_seed << '\n';
    return kOk;
}

int cmd_masks(const Options& o) {
    require(o.landmarks, "--landmarks");
    require(o.output, "--output");
    int w = o.width, h = o.height;
    if (!o.input.empty()) {
        const ImageStack like = load_image(o.input);
        w = like.width();
        h = like.height();
    }
    if (w <= 0 || h <= 0) throw ConfigError("give --input or --width/--height for the mask canvas");
    const LandmarkSet lm = load_landmarks(o.landmarks);
    FacialMaskSet m = rasterize_masks(lm, w, h);
    if (o.mask_deviation > 0) m = perturb_masks(m, o.mask_deviation, o.seed);
    for (const auto& warn : m.warnings) std::cerr << "warning: " << warn << '\n';
    if (m.clamped_points > 0) std::cerr << "warning: " << m.clamped_points << " landmark(s) clamped to the canvas\n";
    fs::create_directories(o.output);
    for (int c = 0; c < kComponentCount; ++c)
        save_image(m[static_cast<FacialComponent>(c)],
                   fs::path(o.output) / (std::string(component_name(static_cast<FacialComponent>(c))) + ".pgm"));
    return kOk;
}

int cmd_restore(const Options& o) {
    require(o.input, "--input");
    require(o.output, "--output");
    PipelineConfig c = make_config(o);
    c.validate();
    const ImageStack in = load_image(o.input);
    RestoreResult r;
    if (c.stage == Stage::EnhanceOnly) {
        const ExemplarDB db = ExemplarDB::from_directory(c.exemplar_dir, c.exemplar, c.cache_dir);
        r = run_enhance(in, db, c.match, c.guided);
    } else {
        require(o.landmarks, "--landmarks");
        const FsgnModel model = load_model(o.weights);
        const LandmarkSet lm = load_landmarks(o.landmarks);
        if (c.stage == Stage::Base) {
            r = run_base(model, in, lm, c.scale, c.mask_deviation, c.seed);
        } else {
            const ExemplarDB db = ExemplarDB::from_directory(c.exemplar_dir, c.exemplar, c.cache_dir);
            r = run_full(model, db, in, lm, c);
        }
        for (const auto& warn : r.masks.warnings) std::cerr << "warning: " << warn << '\n';
    }
    save_image(r.output, o.output);
    if (!o.intermediates.empty()) {
        const fs::path d = o.intermediates;
        fs::create_directories(d);
        if (!r.upsampled.empty()) save_image(r.upsampled, d / "upsampled.png");
        if (!r.base.empty()) save_image(r.base, d / "base.png");
        if (!r.regressed.empty()) {
            save_image(r.regressed, d / "regressed.png");
            save_image(r.transfer.filtered_base, d / "filtered-base.png");
            save_image(r.transfer.filtered_regressed, d / "filtered-regressed.png");
            // Detail is signed; stored offset by 0.5.
            ImagePlane detail = r.transfer.detail;
            for (double& v : detail.data()) v += 0.5;
            save_image(clamp01(std::move(detail)), d / "detail.png");
        }
    }
    return kOk;
}

// Pairs <name>.png in the results directory with <name>.gt.png or <name>.png
// in the ground-truth directory.
int cmd_evaluate(const Options& o) {
    require(o.results, "--results");
    require(o.gt, "--gt");
    if (!fs::is_directory(o.results)) throw ConfigError("results directory not found: " + o.results);
    if (!fs::is_directory(o.gt)) throw ConfigError("ground-truth directory not found: " + o.gt);

    std::optional<IdentityProjector> proj;
    if (!o.projector.empty() && fs::exists(o.projector)) {
        proj = load_projector(o.projector);
    } else if (!o.projector_from.empty()) {
        std::vector<ImageStack> train;
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(o.projector_from))
            if (f.path().extension() == ".png") files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) train.push_back(load_image(f));
        proj = build_projector(train);
        if (!o.projector.empty()) save_projector(*proj, o.projector);
    }

    std::vector<fs::path> results;
    for (const auto& f : fs::directory_iterator(o.results))
        if (f.path().extension() == ".png") results.push_back(f.path());
    std::sort(results.begin(), results.end());

    std::ostringstream out;
    out.precision(6);
    out << std::fixed << "name,psnr,ssim,identity\n";
    double sp = 0, ss = 0, si = 0;
    int n = 0;
    for (const auto& r : results) {
        const std::string name = r.stem().string();
        fs::path g = fs::path(o.gt) / (name + ".gt.png");
        if (!fs::exists(g)) g = fs::path(o.gt) / (name + ".png");
        if (!fs::exists(g)) {
            std::cerr << "warning: no ground truth for " << name << '\n';
            continue;
        }
        const ImageStack a = load_image(r);
        const ImageStack b = load_image(g);
        const double p = psnr(a, b);
        const double s = ssim(a, b);
        const double id = proj ? identity_similarity(a, b, *proj) : std::nan("");
        out << name << ',' << p << ',' << s << ',' << id << '\n';
        sp += p;
        ss += s;
        si += id;
        ++n;
    }
    if (n == 0) throw ConfigError("no result/ground-truth pairs found");
    out << "mean," << sp / n << ',' << ss / n << ',' << si / n << '\n';
    write_text(o.output, out.str());
    return kOk;
}

int cmd_ablate(const Options& o) {
    require(o.dataset, "--dataset");
    require(o.axis, "--axis");
    require(o.values, "--values");
    PipelineConfig c = make_config(o);
    c.exemplar_dir = o.dataset;
    c.validate();
    const FsgnModel model = load_model(o.weights);
    const auto samples = load_dataset(o.dataset);
    const auto rows = ablate(model, samples, c, parse_axis(o.axis), parse_values(o.values));
    write_text(o.output, ablation_csv(rows));
    return kOk;
}

int cmd_kernels(const Options& o) {
    require(o.output, "--output");
    if (o.count < 1 || o.count > kMotionBankSize) throw ConfigError("--count must be in [1, 200]");
    fs::create_directories(o.output);
    const auto bank = motion_kernel_bank(o.kernel_size);
    for (int i = 0; i < o.count; ++i) {
        const Kernel2D& k = bank[static_cast<std::size_t>(i)];
        double peak = 0.0;
        for (double v : k.taps()) peak = std::max(peak, v);
        ImagePlane img(k.size(), k.size());
        for (int y = 0; y < k.size(); ++y)
            for (int x = 0; x < k.size(); ++x) img(x, y) = k(x, y) / peak;
        char name[32];
        std::snprintf(name, sizeof name, "kernel%03d.pgm", i);
        save_image(img, fs::path(o.output) / name);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Face restoration: network base image + exemplar detail enhancement"};
    app.set_config("--config", "", "key=value configuration file; flags override it");
    app.require_subcommand(1, 1);
    Options o;

    app.add_option("-i,--input", o.input, "input image (LR image; base image for --stage enhance-only)");
    app.add_option("-o,--output", o.output, "output image, directory or CSV");
    app.add_option("--landmarks", o.landmarks, "landmark file");
    app.add_option("--weights", o.weights, "network weights file");
    app.add_option("--exemplars", o.exemplars, "directory of HR exemplar images");
    app.add_option("--cache-dir", o.cache_dir, "exemplar statistics cache");
    app.add_option("--intermediates", o.intermediates, "directory for upsampled/base/regressed/detail images");
    app.add_option("--stage", o.stage, "base | enhance-only | full");
    app.add_option("--scale", o.scale, "upsampling / decimation factor");
    app.add_option("--patch-side", o.patch_side);
    app.add_option("--k", o.k, "candidates per patch");
    app.add_option("--alpha", o.alpha, "NCC weight in the patch distance");
    app.add_option("--search-radius", o.search_radius);
    app.add_option("--stride", o.stride);
    app.add_option("--lambda", o.lambda, "ridge weight or 'auto' (patch_side^2 / 255^2)");
    app.add_flag("--smoothed-search", o.smoothed, "regress on smoothed exemplars, reconstruct from sharp ones");
    app.add_option("--gf-radius", o.gf_radius);
    app.add_option("--gf-eps", o.gf_eps);
    app.add_option("--mask-deviation", o.mask_deviation, "shift masks by this many pixels");
    app.add_option("--seed", o.seed);
    app.add_option("--kernel", o.kernel, "motion | gaussian");
    app.add_option("--kernel-size", o.kernel_size);
    app.add_option("--sigma", o.sigma);
    app.add_flag("--random", o.random_spec, "draw kernel size and sigma from the standard ranges");
    app.add_option("--width", o.width);
    app.add_option("--height", o.height);
    app.add_option("--count", o.count);
    app.add_option("--axis", o.axis, "patch_size | k | mask_deviation");
    app.add_option("--values", o.values, "comma-separated sweep values");
    app.add_option("--dataset", o.dataset, "directory of <name>.gt.png/.lr.png/.pts triples");
    app.add_option("--results", o.results);
    app.add_option("--gt", o.gt);
    app.add_option("--projector", o.projector, "PCA projector file (written when built)");
    app.add_option("--projector-from", o.projector_from, "build the projector from these images");

    auto sub = [&](const char* name, const char* help) { return app.add_subcommand(name, help)->fallthrough(); };
    auto* degrade_cmd = sub("degrade", "blur and decimate an HR image");
    auto* masks_cmd = sub("masks", "rasterize component masks from landmarks");
    auto* restore_cmd = sub("restore", "restore an LR face image");
    auto* evaluate_cmd = sub("evaluate", "PSNR / SSIM / identity CSV for a results directory");
    auto* ablate_cmd = sub("ablate", "sweep patch size, K or mask deviation over a dataset");
    auto* kernels_cmd = sub("kernels", "export the motion-kernel bank as PGM images");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (degrade_cmd->parsed()) return cmd_degrade(o);
        if (masks_cmd->parsed()) return cmd_masks(o);
        if (restore_cmd->parsed()) return cmd_restore(o);
        if (evaluate_cmd->parsed()) return cmd_evaluate(o);
        if (ablate_cmd->parsed()) return cmd_ablate(o);
        if (kernels_cmd->parsed()) return cmd_kernels(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}
