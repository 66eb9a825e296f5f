#pragma once

#include "chelsea/errors.hpp"
#include "chelsea/types.hpp"

#include <filesystem>

namespace chelsea {

// Binary tensor file, bit-exact across platforms:
//   magic   "CKVT"           4 bytes
//   version u32 LE           must be 1
//   ndims   u32 LE           1 or 2
//   dims    u64 LE each
//   payload f32 LE, row-major, product(dims) elements
inline constexpr char kTensorMagic[4] = {'C', 'K', 'V', 'T'};
inline constexpr std::uint32_t kTensorVersion = 1;

/// Writes a matrix as a 2-D tensor file. Payload is narrowed to float32.
void save_tensor(const std::filesystem::path& path, const Matrix& m);

/// Reads a tensor file back as a matrix (1-D tensors load as a single row).
/// Throws TensorIoError with a distinct kind per failure class; entries must
/// be finite.
Matrix load_tensor(const std::filesystem::path& path);

}  // namespace chelsea
