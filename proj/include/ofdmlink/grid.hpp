#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ofdmlink/rng.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

inline constexpr std::uint64_t kDefaultPilotSeed = 0x5EED'0001ULL;
inline constexpr std::uint64_t kDefaultInterleaverSeed = 0x5EED'0002ULL;

/// Orthogonal pilot layout. Every RE is either pilot (mask set, unit-modulus
/// value) or data (mask clear, value zero).
class PilotPattern {
public:
    PilotPattern() = default;
    PilotPattern(std::string name, OfdmDims dims, std::vector<std::uint8_t> mask, ComplexGrid values,
                 std::uint64_t seed);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const OfdmDims& dims() const noexcept { return dims_; }
    [[nodiscard]] bool is_pilot(std::size_t flat_index) const { return mask_[flat_index] != 0; }
    [[nodiscard]] const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
    [[nodiscard]] const ComplexGrid& values() const noexcept { return values_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] std::size_t pilot_count() const noexcept { return pilot_indices_.size(); }
    [[nodiscard]] std::size_t data_count() const noexcept { return data_indices_.size(); }
    /// Data-RE fraction (n - n_P) / n.
    [[nodiscard]] double rho() const noexcept {
        return static_cast<double>(data_count()) / static_cast<double>(dims_.size());
    }
    /// Ascending flat indices in vec() order.
    [[nodiscard]] const std::vector<std::size_t>& data_indices() const noexcept { return data_indices_; }
    [[nodiscard]] const std::vector<std::size_t>& pilot_indices() const noexcept { return pilot_indices_; }

private:
    std::string name_;
    OfdmDims dims_{};
    std::vector<std::uint8_t> mask_;
    ComplexGrid values_;
    std::uint64_t seed_ = 0;
    std::vector<std::size_t> data_indices_;
    std::vector<std::size_t> pilot_indices_;
};

/// "none", "1P" (pilots on OFDM symbol 2) or "2P" (symbols 2 and 11), on
/// even subcarriers, with QPSK values drawn from SplitMix64(seed): two bits
/// per pilot RE in vec() order, (1-2b0 + j(1-2b1))/sqrt(2). Named patterns
/// need 14 symbols and an even subcarrier count.
PilotPattern make_pilot_pattern(const std::string& name, const OfdmDims& dims,
                                std::uint64_t seed = kDefaultPilotSeed);

/// Bit-to-RE bookkeeping for one block of `frames_per_block` frames.
///
/// Coded bits of all codewords are concatenated, followed by padding; the
/// stream is permuted into slots, slot q carrying stream bit interleaver[q].
/// Slot q maps to frame q / (n_D m), data RE ((q mod n_D m) / m) in N_D
/// order and bit position q mod m.
struct FramePlan {
    OfdmDims dims;
    std::vector<std::size_t> data_indices;
    std::size_t bits_per_symbol = 0;
    std::size_t code_length = 0;
    std::size_t frames_per_block = 1;
    std::size_t codewords = 0;
    std::size_t padding_bits = 0;
    std::uint64_t interleaver_seed = 0;
    std::vector<std::uint32_t> interleaver;

    [[nodiscard]] std::size_t bits_per_frame() const noexcept { return data_indices.size() * bits_per_symbol; }
    [[nodiscard]] std::size_t block_capacity() const noexcept { return bits_per_frame() * frames_per_block; }

    /// Replaces the interleaver by the identity permutation.
    void use_identity_interleaver();
};

FramePlan plan_frame(const PilotPattern& pattern, std::size_t code_length, std::size_t bits_per_symbol,
                     std::uint64_t interleaver_seed = kDefaultInterleaverSeed, std::size_t frames_per_block = 1);

/// Per-frame bit layout: n * m entries, entry (flat_re * m + i). Pilot REs hold zero.
using BitFrame = std::vector<std::uint8_t>;
/// Per-frame LLR layout, same indexing as BitFrame.
using LlrFrame = std::vector<double>;

/// Codeword bits plus random padding, interleaved and scattered onto data REs.
std::vector<BitFrame> assemble(const FramePlan& plan, const std::vector<std::vector<std::uint8_t>>& codewords,
                               Rng& padding_rng);

/// Inverse of assemble on soft values; padding slots are dropped.
std::vector<std::vector<double>> disassemble(const FramePlan& plan, const std::vector<LlrFrame>& frames);

/// Scatters per-codeword soft values back onto frames (padding slots get `padding_value`).
std::vector<LlrFrame> scatter_soft(const FramePlan& plan, const std::vector<std::vector<double>>& codewords,
                                   double padding_value = 0.0);

nlohmann::json pattern_to_json(const PilotPattern& pattern);
PilotPattern pattern_from_json(const nlohmann::json& j);
/// Plan JSON also embeds the pattern description; the interleaver is stored by seed.
nlohmann::json plan_to_json(const FramePlan& plan, const PilotPattern& pattern);
std::pair<FramePlan, PilotPattern> plan_from_json(const nlohmann::json& j);

}  // namespace ofdmlink
