#include "facerestore/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace facerestore {

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n)
            throw TensorFileError(TensorFileError::Kind::Truncated, std::string("truncated tensor file while reading ") + what);
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_tensors(const std::vector<Tensor>& tensors) {
    std::vector<std::uint8_t> out = {'F', 'S', 'G', 'N'};
    put_u32(out, kTensorFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        if (t.values.size() != t.element_count())
            throw std::invalid_argument("tensor '" + t.name + "': payload does not match dims");
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.insert(out.end(), t.name.begin(), t.name.end());
        put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
        for (auto d : t.dims) put_u32(out, d);
        for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<Tensor> decode_tensors(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (r.remaining() < 4 || std::memcmp(bytes.data(), "FSGN", 4) != 0)
        throw TensorFileError(TensorFileError::Kind::BadMagic, "bad magic: not an FSGN tensor file");
    r.str(4, "magic");
    const auto version = r.u32("version");
    if (version != kTensorFormatVersion)
        throw TensorFileError(TensorFileError::Kind::VersionMismatch,
                              "unsupported tensor file version " + std::to_string(version));
    const auto count = r.u32("tensor count");
    std::vector<Tensor> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor t;
        t.name = r.str(r.u32("name length"), "name");
        const auto ndim = r.u32("ndim");
        if (ndim > 8) throw TensorFileError(TensorFileError::Kind::ShapeMismatch, "tensor '" + t.name + "': too many dims");
        for (std::uint32_t d = 0; d < ndim; ++d) t.dims.push_back(r.u32("dims"));
        const auto n = t.element_count();
        if (n > r.remaining() / 4)
            throw TensorFileError(TensorFileError::Kind::Truncated, "truncated payload for tensor '" + t.name + "'");
        t.values.resize(n);
        for (auto& v : t.values) v = r.f32("payload");
        tensors.push_back(std::move(t));
    }
    return tensors;
}

void write_tensor_file(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
    const auto bytes = encode_tensors(tensors);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw TensorFileError(TensorFileError::Kind::Io, "cannot write " + path.string());
}

std::vector<Tensor> read_tensor_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TensorFileError(TensorFileError::Kind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_tensors(bytes);
}

}  // namespace facerestore
