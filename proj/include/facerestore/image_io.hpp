#pragma once

#include <filesystem>

#include "facerestore/image.hpp"

namespace facerestore {

/// Reads 8-bit PNG or binary PGM (P5) / PPM (P6). Gray files load as a Luma
/// stack, color files as RGB (alpha is dropped). Values are v/255.
ImageStack load_image(const std::filesystem::path& path);

/// Writes by extension: .png, .pgm (single channel) or .ppm (RGB).
/// Values are stored as round(v*255) after clamping to [0,1].
void save_image(const ImageStack& img, const std::filesystem::path& path);
void save_image(const ImagePlane& plane, const std::filesystem::path& path);

}  // namespace facerestore
