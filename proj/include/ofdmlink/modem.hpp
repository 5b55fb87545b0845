#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ofdmlink/grid.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

/// 2^m labeled points. Point u carries label bits c_u^(i) = bit i of u,
/// MSB first (i = 0 is the most significant of the m bits).
class Constellation {
public:
    Constellation() = default;
    /// Takes the points as given; only the count is validated.
    Constellation(std::size_t bits_per_symbol, std::vector<cplx> points);

    [[nodiscard]] std::size_t bits_per_symbol() const noexcept { return m_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] const std::vector<cplx>& points() const noexcept { return points_; }
    [[nodiscard]] const cplx& point(std::size_t label) const { return points_[label]; }
    [[nodiscard]] cplx mean() const noexcept { return mean_; }
    [[nodiscard]] double energy() const noexcept { return energy_; }

    [[nodiscard]] int bit(std::size_t label, std::size_t i) const noexcept {
        return static_cast<int>((label >> (m_ - 1 - i)) & 1U);
    }

private:
    std::size_t m_ = 0;
    std::vector<cplx> points_;
    cplx mean_{};
    double energy_ = 0.0;
};

/// Square QAM with per-axis Gray labels and unit average power; m in {2, 4, 6}.
/// The first m/2 label bits select the in-phase level, the rest the quadrature.
Constellation gray_qam(std::size_t bits_per_symbol);

/// {-1, +1} with labels 0 and 1.
Constellation bpsk();

/// Centering and normalization: (C - mean) / sqrt(mean|C|^2 - |mean|^2).
Constellation normalize_center(std::span<const cplx> raw_points);

/// Throws unless the constellation is centered and unit-power within `tol`.
void require_centered(const Constellation& c, double tol);

/// Label of one RE from m bits (MSB first).
std::size_t bits_to_label(std::span<const std::uint8_t> bits);

/// Maps data-RE bits to points and writes pilot values at pilot REs.
ComplexGrid map_bits(const Constellation& c, const PilotPattern& pattern, const BitFrame& bits);

/// Nearest-point labels.
std::vector<std::size_t> hard_demap(const Constellation& c, std::span<const cplx> symbols);

/// Per-RE superimposed-pilot energy fraction A and BPSK pilot P.
struct SipAllocation {
    ResourceGrid<double> fraction;
    ResourceGrid<double> pilot;
    std::uint64_t seed = 0;
};

/// Balanced +-1 sequence (exactly zero mean for even n), SplitMix64 Fisher-Yates shuffled.
ResourceGrid<double> sip_pilot_sequence(const OfdmDims& dims, std::uint64_t seed);

SipAllocation make_sip_allocation(ResourceGrid<double> fraction, std::uint64_t seed);

/// X = sqrt(1 - A) o Xd + sqrt(A) o P.
ComplexGrid sip_combine(const ComplexGrid& data_symbols, const SipAllocation& alloc);

/// CSV `label,re,im` with 17 significant digits.
void save_constellation(const Constellation& c, const std::filesystem::path& path);
/// Rejects files whose point count is not 2^m, or that are not centered and
/// unit-power within `tol`. `expected_bits` = 0 infers m from the count.
Constellation load_constellation(const std::filesystem::path& path, std::size_t expected_bits = 0,
                                 double tol = 1e-6);

/// CSV: `seed,<u64>` line, then `i,k,A` rows for every RE.
void save_sip_allocation(const SipAllocation& alloc, const std::filesystem::path& path);
SipAllocation load_sip_allocation(const std::filesystem::path& path, const OfdmDims& dims);

}  // namespace ofdmlink
