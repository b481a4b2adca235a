#pragma once

#include <cstdint>

#include "facerestore/face_masks.hpp"
#include "facerestore/image.hpp"

namespace facesynth {

struct SynthFace {
    facerestore::ImageStack image;  // RGB
    facerestore::LandmarkSet landmarks;
};

/// Procedural frontal face with 68-point landmarks; geometry, tones and
/// lighting vary with the seed.
SynthFace make_face(std::uint64_t seed, int width = 64, int height = 64);

}  // namespace facesynth
