#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace ofdmlink {

/// Little-endian layout: "LNKT", version u8, dtype u8, rank u8, rank x u64
/// dims, then the payload in row-major order (last dim fastest). c64 is
/// stored as interleaved f32 (re, im).
enum class DType : std::uint8_t { f32 = 1, c64 = 2 };

inline constexpr std::uint8_t kTensorVersion = 1;

struct Tensor {
    DType dtype = DType::f32;
    std::vector<std::uint64_t> dims;
    std::vector<float> data;  ///< element count, doubled for c64

    [[nodiscard]] std::uint64_t element_count() const noexcept;
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

/// Hermitian n x n matrix as a c64 [n, n] tensor, entry (i, j) at i * n + j.
Tensor matrix_to_tensor(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd tensor_to_matrix(const Tensor& t);

}  // namespace ofdmlink
