#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "facerestore/detail_transfer.hpp"
#include "facerestore/exemplar.hpp"
#include "facerestore/face_masks.hpp"
#include "facerestore/fsgn.hpp"
#include "facerestore/image.hpp"

namespace facerestore {

enum class Stage { Base, EnhanceOnly, Full };

Stage parse_stage(const std::string& s);
std::string stage_name(Stage s);

struct PipelineConfig {
    std::filesystem::path weights;
    std::filesystem::path exemplar_dir;
    std::optional<std::filesystem::path> cache_dir;
    MatchParams match;
    ExemplarOptions exemplar;
    GuidedFilterParams guided;
    int scale = 4;
    double mask_deviation = 0.0;
    std::uint64_t seed = 0;
    Stage stage = Stage::Full;

    /// Checks parameter ranges and that referenced paths exist for the
    /// selected stage. Throws ConfigError.
    void validate() const;
};

struct RestoreResult {
    ImageStack upsampled;
    FacialMaskSet masks;
    ImageStack base;       ///< network output
    ImageStack regressed;  ///< exemplar regression (luma); empty for the base stage
    TransferResult transfer;
    ImageStack output;
};

/// Bicubic upsample -> masks (optionally perturbed) -> network forward.
RestoreResult run_base(const FsgnModel& model, const ImageStack& lr, const LandmarkSet& landmarks, int scale,
                       double mask_deviation = 0.0, std::uint64_t seed = 0);

/// Exemplar regression and detail transfer on an existing base image.
RestoreResult run_enhance(const ImageStack& base, const ExemplarDB& db, const MatchParams& match,
                          const GuidedFilterParams& guided);

/// Full pipeline. The base image is quantized to 8 bits before
/// enhancement, so writing the base stage and enhancing the written file
/// reproduces this result bit-exactly.
RestoreResult run_full(const FsgnModel& model, const ExemplarDB& db, const ImageStack& lr,
                       const LandmarkSet& landmarks, const PipelineConfig& config);

/// One fixture of an evaluation set: <name>.gt.png, <name>.lr.png, <name>.pts.
struct Sample {
    std::string name;
    ImageStack gt;
    ImageStack lr;
    LandmarkSet landmarks;
};

/// Loads every complete triple in `dir`, sorted by name. Throws ConfigError
/// when none is found.
std::vector<Sample> load_dataset(const std::filesystem::path& dir);

/// Exemplar set for sample `index`: ground truths of every other sample.
ExemplarDB leave_one_out_db(const std::vector<Sample>& samples, std::size_t index, const ExemplarOptions& options);

struct ImageScores {
    std::string name;
    double psnr_bicubic = 0.0;
    double psnr_base = 0.0;
    double psnr_full = 0.0;
    double ssim_bicubic = 0.0;
    double ssim_base = 0.0;
    double ssim_full = 0.0;
};

/// Restores every sample with leave-one-out exemplars and scores the
/// bicubic, base and full outputs against the ground truth.
std::vector<ImageScores> evaluate_dataset(const FsgnModel& model, const std::vector<Sample>& samples,
                                          const PipelineConfig& config);

enum class AblationAxis { PatchSize, K, MaskDeviation };

AblationAxis parse_axis(const std::string& s);
std::string axis_name(AblationAxis a);

struct AblationRow {
    AblationAxis axis;
    double value = 0.0;
    double psnr = 0.0;  ///< mean over the set
    double ssim = 0.0;
};

/// Full-pipeline PSNR/SSIM per sweep value. Throws ConfigError for an empty
/// set or sweep.
std::vector<AblationRow> ablate(const FsgnModel& model, const std::vector<Sample>& samples,
                                const PipelineConfig& config, AblationAxis axis, const std::vector<double>& values);

std::string ablation_csv(const std::vector<AblationRow>& rows);
std::string scores_csv(const std::vector<ImageScores>& rows);

}  // namespace facerestore
