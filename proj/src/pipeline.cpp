#include "facerestore/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "facerestore/errors.hpp"
#include "facerestore/image_io.hpp"
#include "facerestore/metrics.hpp"

namespace facerestore {

namespace {

// Re-throws with the stage name prefixed, keeping the error category.
template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    const std::string p = std::string(stage) + ": ";
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(p + e.what());
    } catch (const DataError& e) {
        throw DataError(p + e.what());
    } catch (const StateError& e) {
        throw StateError(p + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(p + e.what());
    } catch (const std::out_of_range& e) {
        throw std::out_of_range(p + e.what());
    }
}

const std::string kGt = ".gt.png";
const std::string kLr = ".lr.png";
const std::string kPts = ".pts";

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

Stage parse_stage(const std::string& s) {
    if (s == "base") return Stage::Base;
    if (s == "enhance-only") return Stage::EnhanceOnly;
    if (s == "full") return Stage::Full;
    throw ConfigError("unknown stage '" + s + "' (expected base, enhance-only or full)");
}

std::string stage_name(Stage s) {
    switch (s) {
        case Stage::Base: return "base";
        case Stage::EnhanceOnly: return "enhance-only";
        case Stage::Full: return "full";
    }
    return "?";
}

void PipelineConfig::validate() const {
    try {
        match.validate();
        guided.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (match.patch_side != exemplar.patch_side) throw ConfigError("patch side differs between matching and database");
    if (exemplar.search_radius < 0) throw ConfigError("search radius must be >= 0");
    if (scale < 1) throw ConfigError("scale must be >= 1");
    if (mask_deviation < 0) throw ConfigError("mask deviation must be >= 0");
    if (stage != Stage::EnhanceOnly) {
        if (weights.empty()) throw ConfigError("no network weights given (--weights)");
        if (!std::filesystem::exists(weights)) throw ConfigError("weights file not found: " + weights.string());
    }
    if (stage != Stage::Base) {
        if (exemplar_dir.empty()) throw ConfigError("no exemplar directory given (--exemplars)");
        if (!std::filesystem::is_directory(exemplar_dir))
            throw ConfigError("exemplar directory not found: " + exemplar_dir.string());
    }
}

RestoreResult run_base(const FsgnModel& model, const ImageStack& lr, const LandmarkSet& landmarks, int scale,
                       double mask_deviation, std::uint64_t seed) {
    RestoreResult r;
    r.upsampled = in_stage("upsample", [&] { return bicubic_resize(lr, Scale{scale, 1}); });
    r.masks = in_stage("masks", [&] {
        auto m = rasterize_masks(landmarks, r.upsampled.width(), r.upsampled.height());
        return mask_deviation > 0 ? perturb_masks(m, mask_deviation, seed) : m;
    });
    r.base = in_stage("fsgn", [&] { return fsgn_forward(model, r.upsampled, r.masks); });
    r.output = r.base;
    return r;
}

RestoreResult run_enhance(const ImageStack& base, const ExemplarDB& db, const MatchParams& match,
                          const GuidedFilterParams& guided) {
    RestoreResult r;
    r.base = base;
    r.regressed = in_stage("exemplar", [&] { return regress_image(db, base, match); });
    r.transfer = in_stage("detail transfer", [&] { return transfer_details_full(base, r.regressed, guided); });
    r.output = r.transfer.output;
    return r;
}

RestoreResult run_full(const FsgnModel& model, const ExemplarDB& db, const ImageStack& lr,
                       const LandmarkSet& landmarks, const PipelineConfig& config) {
    RestoreResult b = run_base(model, lr, landmarks, config.scale, config.mask_deviation, config.seed);
    RestoreResult e = run_enhance(quantize_8bit(b.base), db, config.match, config.guided);
    e.upsampled = std::move(b.upsampled);
    e.masks = std::move(b.masks);
    return e;
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("dataset directory not found: " + dir.string());
    std::vector<std::string> names;
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        const std::string fn = f.path().filename().string();
        if (!ends_with(fn, kGt)) continue;
        const std::string name = fn.substr(0, fn.size() - kGt.size());
        if (std::filesystem::exists(dir / (name + kLr)) && std::filesystem::exists(dir / (name + kPts)))
            names.push_back(name);
    }
    if (names.empty()) throw ConfigError("no <name>.gt.png/.lr.png/.pts triples in " + dir.string());
    std::sort(names.begin(), names.end());
    std::vector<Sample> out;
    for (const auto& n : names)
        out.push_back({n, load_image(dir / (n + kGt)), load_image(dir / (n + kLr)),
                       load_landmarks((dir / (n + kPts)).string())});
    return out;
}

ExemplarDB leave_one_out_db(const std::vector<Sample>& samples, std::size_t index, const ExemplarOptions& options) {
    std::vector<ImageStack> ex;
    for (std::size_t j = 0; j < samples.size(); ++j)
        if (j != index) ex.push_back(samples[j].gt);
    return ExemplarDB::build(ex, options);
}

std::vector<ImageScores> evaluate_dataset(const FsgnModel& model, const std::vector<Sample>& samples,
                                          const PipelineConfig& config) {
    if (samples.size() < 2) throw ConfigError("evaluation needs at least two samples (leave-one-out exemplars)");
    std::vector<ImageScores> rows;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        const ExemplarDB db = leave_one_out_db(samples, i, config.exemplar);
        PipelineConfig c = config;
        c.seed = config.seed + i;
        const RestoreResult r = run_full(model, db, s.lr, s.landmarks, c);
        ImageScores sc;
        sc.name = s.name;
        sc.psnr_bicubic = psnr(r.upsampled, s.gt);
        sc.psnr_base = psnr(r.base, s.gt);
        sc.psnr_full = psnr(r.output, s.gt);
        sc.ssim_bicubic = ssim(r.upsampled, s.gt);
        sc.ssim_base = ssim(r.base, s.gt);
        sc.ssim_full = ssim(r.output, s.gt);
        rows.push_back(sc);
    }
    return rows;
}

AblationAxis parse_axis(const std::string& s) {
    if (s == "patch_size" || s == "patch-size") return AblationAxis::PatchSize;
    if (s == "k") return AblationAxis::K;
    if (s == "mask_deviation" || s == "mask-deviation") return AblationAxis::MaskDeviation;
    throw ConfigError("unknown ablation axis '" + s + "' (expected patch_size, k or mask_deviation)");
}

std::string axis_name(AblationAxis a) {
    switch (a) {
        case AblationAxis::PatchSize: return "patch_size";
        case AblationAxis::K: return "k";
        case AblationAxis::MaskDeviation: return "mask_deviation";
    }
    return "?";
}

std::vector<AblationRow> ablate(const FsgnModel& model, const std::vector<Sample>& samples,
                                const PipelineConfig& config, AblationAxis axis, const std::vector<double>& values) {
    if (samples.empty()) throw ConfigError("ablation test set is empty");
    if (values.empty()) throw ConfigError("ablation sweep has no values");
    if (samples.size() < 2) throw ConfigError("ablation needs at least two samples (leave-one-out exemplars)");

    // Base images do not depend on the exemplar settings.
    std::vector<ImageStack> shared_base;
    if (axis != AblationAxis::MaskDeviation)
        for (std::size_t i = 0; i < samples.size(); ++i)
            shared_base.push_back(quantize_8bit(
                run_base(model, samples[i].lr, samples[i].landmarks, config.scale, config.mask_deviation,
                         config.seed + i)
                    .base));

    std::vector<AblationRow> rows;
    for (double v : values) {
        PipelineConfig c = config;
        switch (axis) {
            case AblationAxis::PatchSize:
                if (v < 1 || v != std::floor(v)) throw ConfigError("patch size must be a positive integer");
                c.match.patch_side = c.exemplar.patch_side = static_cast<int>(v);
                c.match.lambda.reset();
                break;
            case AblationAxis::K:
                if (v < 1 || v != std::floor(v)) throw ConfigError("k must be a positive integer");
                c.match.k = static_cast<int>(v);
                break;
            case AblationAxis::MaskDeviation:
                if (v < 0) throw ConfigError("mask deviation must be >= 0");
                c.mask_deviation = v;
                break;
        }
        std::vector<double> ps, ss;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const ExemplarDB db = leave_one_out_db(samples, i, c.exemplar);
            ImageStack base;
            if (axis == AblationAxis::MaskDeviation)
                base = quantize_8bit(
                    run_base(model, samples[i].lr, samples[i].landmarks, c.scale, c.mask_deviation, c.seed + i).base);
            else
                base = shared_base[i];
            const RestoreResult r = run_enhance(base, db, c.match, c.guided);
            ps.push_back(psnr(r.output, samples[i].gt));
            ss.push_back(ssim(r.output, samples[i].gt));
        }
        rows.push_back({axis, v, mean_of(ps), mean_of(ss)});
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << "axis,value,psnr,ssim\n";
    for (const auto& r : rows) {
        out << axis_name(r.axis) << ',' << std::defaultfloat << r.value << std::fixed << ',' << r.psnr << ','
            << r.ssim << '\n';
    }
    return out.str();
}

std::string scores_csv(const std::vector<ImageScores>& rows) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << "name,psnr_bicubic,psnr_base,psnr_full,ssim_bicubic,ssim_base,ssim_full\n";
    ImageScores mean{"mean"};
    for (const auto& r : rows) {
        out << r.name << ',' << r.psnr_bicubic << ',' << r.psnr_base << ',' << r.psnr_full << ',' << r.ssim_bicubic
            << ',' << r.ssim_base << ',' << r.ssim_full << '\n';
        mean.psnr_bicubic += r.psnr_bicubic / rows.size();
        mean.psnr_base += r.psnr_base / rows.size();
        mean.psnr_full += r.psnr_full / rows.size();
        mean.ssim_bicubic += r.ssim_bicubic / rows.size();
        mean.ssim_base += r.ssim_base / rows.size();
        mean.ssim_full += r.ssim_full / rows.size();
    }
    if (!rows.empty())
        out << mean.name << ',' << mean.psnr_bicubic << ',' << mean.psnr_base << ',' << mean.psnr_full << ','
            << mean.ssim_bicubic << ',' << mean.ssim_base << ',' << mean.ssim_full << '\n';
    return out.str();
}

}  // namespace facerestore
