#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facerestore/errors.hpp"

namespace facerestore {

/// Named f32 tensor as stored in the portable weights format:
///
///   "FSGN" | u32 version (=1) | u32 count |
///   count x { u32 name_len | name | u32 ndim | u32 dims[ndim] | f32 payload }
///
/// All integers and floats little-endian; payload is row-major.
struct Tensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> values;

    std::size_t element_count() const;
};

inline constexpr std::uint32_t kTensorFormatVersion = 1;

class TensorFileError : public DataError {
public:
    enum class Kind { BadMagic, VersionMismatch, Truncated, ShapeMismatch, MissingTensor, Io };
    TensorFileError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

std::vector<std::uint8_t> encode_tensors(const std::vector<Tensor>& tensors);
std::vector<Tensor> decode_tensors(const std::vector<std::uint8_t>& bytes);

void write_tensor_file(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_tensor_file(const std::filesystem::path& path);

}  // namespace facerestore
