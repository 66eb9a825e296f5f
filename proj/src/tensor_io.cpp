#include "chelsea/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace chelsea {
namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                   static_cast<char>((v >> 16) & 0xff),
                                   static_cast<char>((v >> 24) & 0xff)};
    os.write(b.data(), b.size());
}

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    os.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& is) {
    std::array<unsigned char, 4> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw TensorIoError(TensorIoError::Kind::short_read, "tensor file: truncated header");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw TensorIoError(TensorIoError::Kind::short_read, "tensor file: truncated header");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    }
    return v;
}

}  // namespace

void save_tensor(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw TensorIoError(TensorIoError::Kind::open_failed,
                            "tensor file: cannot open for writing: " + path.string());
    }
    os.write(kTensorMagic, 4);
    put_u32(os, kTensorVersion);
    put_u32(os, 2);
    put_u64(os, static_cast<std::uint64_t>(m.rows()));
    put_u64(os, static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            const float f = static_cast<float>(m(i, j));
            const auto bits = std::bit_cast<std::uint32_t>(f);
            put_u32(os, bits);
        }
    }
    if (!os) {
        throw TensorIoError(TensorIoError::Kind::open_failed,
                            "tensor file: write failed: " + path.string());
    }
}

Matrix load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw TensorIoError(TensorIoError::Kind::open_failed,
                            "tensor file: cannot open: " + path.string());
    }
    char magic[4];
    if (!is.read(magic, 4)) {
        throw TensorIoError(TensorIoError::Kind::short_read, "tensor file: truncated magic");
    }
    if (std::memcmp(magic, kTensorMagic, 4) != 0) {
        throw TensorIoError(TensorIoError::Kind::bad_magic,
                            "tensor file: bad magic in " + path.string());
    }
    const std::uint32_t version = get_u32(is);
    if (version != kTensorVersion) {
        throw TensorIoError(TensorIoError::Kind::bad_version,
                            "tensor file: unsupported version " + std::to_string(version));
    }
    const std::uint32_t ndims = get_u32(is);
    if (ndims < 1 || ndims > 2) {
        throw TensorIoError(TensorIoError::Kind::size_mismatch,
                            "tensor file: unsupported ndims " + std::to_string(ndims));
    }
    std::vector<std::uint64_t> dims(ndims);
    for (auto& d : dims) {
        d = get_u64(is);
    }
    const std::uint64_t rows = ndims == 2 ? dims[0] : 1;
    const std::uint64_t cols = ndims == 2 ? dims[1] : dims[0];
    const std::uint64_t count = rows * cols;
    if (cols > 0 && rows > std::numeric_limits<std::uint64_t>::max() / cols) {
        throw TensorIoError(TensorIoError::Kind::size_mismatch, "tensor file: dims overflow");
    }

    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::uint64_t k = 0; k < count; ++k) {
        std::array<unsigned char, 4> b;
        if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
            throw TensorIoError(TensorIoError::Kind::short_read,
                                "tensor file: payload shorter than dims imply");
        }
        const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                                   (static_cast<std::uint32_t>(b[1]) << 8) |
                                   (static_cast<std::uint32_t>(b[2]) << 16) |
                                   (static_cast<std::uint32_t>(b[3]) << 24);
        const float f = std::bit_cast<float>(bits);
        if (!std::isfinite(f)) {
            throw TensorIoError(TensorIoError::Kind::bad_payload,
                                "tensor file: non-finite payload entry");
        }
        m(static_cast<Index>(k / cols), static_cast<Index>(k % cols)) = static_cast<Real>(f);
    }
    // Any trailing bytes mean the dims understate the payload.
    char probe;
    if (is.read(&probe, 1)) {
        throw TensorIoError(TensorIoError::Kind::size_mismatch,
                            "tensor file: payload longer than dims imply");
    }
    return m;
}

}  // namespace chelsea
