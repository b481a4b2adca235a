// Generates the synthetic face fixtures and the toy training set.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "facerestore/degrade.hpp"
#include "facerestore/face_masks.hpp"
#include "facerestore/image_io.hpp"
#include "facerestore/rng.hpp"
#include "facerestore/tensor_io.hpp"
#include "synth_face.hpp"

using namespace facerestore;

namespace {

struct Degraded {
    ImageStack lr;
    DegradeSpec spec;
};

// Even indices get a motion kernel, odd ones a Gaussian.
Degraded degrade_sample(const ImageStack& gt, std::uint64_t seed, std::size_t index) {
    Rng rng(seed * 7919 + 17);
    const KernelKind kind = index % 2 == 0 ? KernelKind::Motion : KernelKind::Gaussian;
    const DegradeSpec spec = sample_degrade_spec(rng, kind, 4);
    return {quantize_8bit(degrade(gt, spec)), spec};
}

void append_planes(std::vector<float>& dst, const ImageStack& s) {
    for (const auto& c : s.channels())
        for (double v : c.data()) dst.push_back(static_cast<float>(v));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixture generator"};
    app.require_subcommand(1);

    std::string out;
    int count = 10;
    std::uint64_t seed = 1000;
    int size = 64;

    auto* faces = app.add_subcommand("faces", "write <name>.gt.png / .lr.png / .pts triples");
    faces->add_option("--out", out)->required();
    faces->add_option("--count", count);
    faces->add_option("--seed", seed);
    faces->add_option("--size", size);

    auto* training = app.add_subcommand("training", "write network input/target tensors");
    training->add_option("--out", out)->required();
    training->add_option("--count", count);
    training->add_option("--seed", seed);
    training->add_option("--size", size);

    CLI11_PARSE(app, argc, argv);

    if (faces->parsed()) {
        std::filesystem::create_directories(out);
        std::ofstream manifest(std::filesystem::path(out) / "degradations.txt");
        manifest << "# name kind kernel_size sigma bank_seed\n";
        for (int i = 0; i < count; ++i) {
            const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
            const auto face = facesynth::make_face(s, size, size);
            const auto d = degrade_sample(face.image, s, static_cast<std::size_t>(i));
            char name[32];
            std::snprintf(name, sizeof name, "face%02d", i);
            const auto base = std::filesystem::path(out) / name;
            save_image(face.image, base.string() + ".gt.png");
            save_image(d.lr, base.string() + ".lr.png");
            std::ofstream(base.string() + ".pts") << format_landmarks(face.landmarks);
            manifest << name << ' ' << (d.spec.kernel_kind == KernelKind::Motion ? "motion" : "gaussian") << ' '
                     << d.spec.kernel_size << ' ' << d.spec.gaussian_sigma << ' ' << d.spec.rng_seed << '\n';
        }
        std::cout << "wrote " << count << " fixtures to " << out << '\n';
        return 0;
    }

    std::vector<float> input, target;
    for (int i = 0; i < count; ++i) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
        const auto face = facesynth::make_face(s, size, size);
        const auto d = degrade_sample(face.image, s, static_cast<std::size_t>(i));
        const ImageStack up = bicubic_resize(d.lr, Scale{4, 1});
        const FacialMaskSet masks = rasterize_masks(face.landmarks, size, size);
        append_planes(input, up);
        append_planes(input, masks.as_stack());
        append_planes(target, face.image);
    }
    const auto n = static_cast<std::uint32_t>(count), h = static_cast<std::uint32_t>(size);
    write_tensor_file(out, {{"input", {n, 7, h, h}, std::move(input)}, {"target", {n, 3, h, h}, std::move(target)}});
    std::cout << "wrote " << count << " training samples to " << out << '\n';
    return 0;
}
