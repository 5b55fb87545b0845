#include "ofdmlink/tensor.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "ofdmlink/error.hpp"

namespace ofdmlink {

static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 4> kMagic{'L', 'N', 'K', 'T'};
constexpr std::uint8_t kMaxRank = 16;

std::uint64_t width(DType d) { return d == DType::c64 ? 2 : 1; }

}  // namespace

std::uint64_t Tensor::element_count() const noexcept {
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    if (t.dtype != DType::f32 && t.dtype != DType::c64) throw FormatError("write_tensor: unknown dtype");
    if (t.dims.size() > kMaxRank) throw FormatError("write_tensor: rank too large");
    if (t.data.size() != t.element_count() * width(t.dtype)) {
        throw DimensionError("write_tensor: payload size does not match dims");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_tensor: cannot open " + path.string());
    out.write(kMagic.data(), kMagic.size());
    const std::uint8_t head[3] = {kTensorVersion, static_cast<std::uint8_t>(t.dtype),
                                  static_cast<std::uint8_t>(t.dims.size())};
    out.write(reinterpret_cast<const char*>(head), sizeof head);
    out.write(reinterpret_cast<const char*>(t.dims.data()), static_cast<std::streamsize>(t.dims.size() * 8));
    out.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.data.size() * 4));
    if (!out) throw FormatError("write_tensor: write failed for " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("read_tensor: cannot open " + path.string());
    std::array<char, 4> magic{};
    std::uint8_t head[3] = {};
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(head), sizeof head);
    if (!in || magic != kMagic) throw FormatError("read_tensor: bad magic in " + path.string());
    if (head[0] != kTensorVersion) throw FormatError("read_tensor: unsupported version " + std::to_string(head[0]));
    if (head[1] != 1 && head[1] != 2) throw FormatError("read_tensor: unknown dtype " + std::to_string(head[1]));
    if (head[2] > kMaxRank) throw FormatError("read_tensor: rank too large");
    Tensor t;
    t.dtype = static_cast<DType>(head[1]);
    t.dims.resize(head[2]);
    in.read(reinterpret_cast<char*>(t.dims.data()), static_cast<std::streamsize>(t.dims.size() * 8));
    if (!in) throw FormatError("read_tensor: truncated header");
    const auto header_end = in.tellg();
    in.seekg(0, std::ios::end);
    const auto payload_bytes = static_cast<std::uint64_t>(in.tellg() - header_end);
    const std::uint64_t expected = t.element_count() * width(t.dtype) * 4;
    if (payload_bytes != expected) {
        throw FormatError("read_tensor: payload is " + std::to_string(payload_bytes) + " bytes, dims need " +
                          std::to_string(expected));
    }
    in.seekg(header_end);
    t.data.resize(expected / 4);
    in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(expected));
    if (!in) throw FormatError("read_tensor: read failed");
    return t;
}

Tensor matrix_to_tensor(const Eigen::MatrixXcd& m) {
    Tensor t;
    t.dtype = DType::c64;
    t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    t.data.resize(static_cast<std::size_t>(m.size()) * 2);
    std::size_t q = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            t.data[q++] = static_cast<float>(m(i, j).real());
            t.data[q++] = static_cast<float>(m(i, j).imag());
        }
    }
    return t;
}

Eigen::MatrixXcd tensor_to_matrix(const Tensor& t) {
    if (t.dtype != DType::c64 || t.dims.size() != 2) throw FormatError("tensor_to_matrix: need a rank-2 c64 tensor");
    const auto rows = static_cast<Eigen::Index>(t.dims[0]);
    const auto cols = static_cast<Eigen::Index>(t.dims[1]);
    Eigen::MatrixXcd m(rows, cols);
    std::size_t q = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j, q += 2) m(i, j) = {t.data[q], t.data[q + 1]};
    }
    return m;
}

}  // namespace ofdmlink
