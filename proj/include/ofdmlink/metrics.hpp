#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ofdmlink/modem.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

/// (1/rho) sum|H|^2 / (n m r sigma2), linear.
double eb_over_sigma2(const ComplexGrid& h, double sigma2, double rho, std::size_t m, double code_rate);
/// sum|H|^2 / (n sigma2), linear.
double es_over_sigma2(const ComplexGrid& h, double sigma2);
/// r rho m n (1 - BER), bits per frame.
double goodput(double code_rate, double rho, std::size_t m, std::size_t n, double ber);

/// Noise variance reaching a target mean Eb/sigma2 (dB) on a unit-power channel.
double sigma2_for_eb_db(double eb_db, double rho, std::size_t m, double code_rate);
/// Noise variance reaching a target mean Es/sigma2 (dB) on a unit-power channel.
double sigma2_for_es_db(double es_db);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct FrameMetrics {
    std::uint64_t bit_errors = 0;
    std::uint64_t info_bits = 0;
    double eb_over_sigma2 = 0.0;
    double es_over_sigma2 = 0.0;
    double channel_energy = 0.0;
};

struct ConfidenceInterval {
    double low = 0.0;
    double high = 0.0;
};

/// Bit-error counts with codewords as the independent unit. Mergeable.
class BerAccumulator {
public:
    void add_codeword(std::uint64_t errors, std::uint64_t bits);
    void merge(const BerAccumulator& other);

    [[nodiscard]] std::uint64_t errors() const noexcept { return errors_; }
    [[nodiscard]] std::uint64_t bits() const noexcept { return bits_; }
    [[nodiscard]] std::uint64_t codewords() const noexcept { return codewords_; }
    [[nodiscard]] double ber() const noexcept;
    /// Standard error of the BER from the spread of per-codeword error counts.
    [[nodiscard]] double standard_error() const noexcept;
    /// Normal approximation, ber +- z * standard_error, clipped to [0, 1].
    [[nodiscard]] ConfidenceInterval interval(double z = 1.96) const noexcept;

private:
    std::uint64_t errors_ = 0;
    std::uint64_t bits_ = 0;
    std::uint64_t codewords_ = 0;
    double sum_sq_ = 0.0;  ///< sum of squared per-codeword error counts
};

/// Paired per-codeword BER difference a - b on common random numbers. Mergeable.
class PairedDifference {
public:
    void add_codeword(std::uint64_t errors_a, std::uint64_t errors_b, std::uint64_t bits);
    void merge(const PairedDifference& other);

    [[nodiscard]] std::uint64_t codewords() const noexcept { return codewords_; }
    [[nodiscard]] double mean() const noexcept;  ///< BER_a - BER_b
    [[nodiscard]] double standard_error() const noexcept;

private:
    std::uint64_t codewords_ = 0;
    std::uint64_t bits_ = 0;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
};

/// Peak-to-average power of one OFDM symbol after an inverse DFT.
/// Not thread-safe; use one meter per thread.
class PaprMeter {
public:
    explicit PaprMeter(std::size_t n_subcarriers, std::size_t oversampling = 1);
    ~PaprMeter();
    PaprMeter(const PaprMeter&) = delete;
    PaprMeter& operator=(const PaprMeter&) = delete;

    /// Linear PAPR, max|x_t|^2 / mean|x_t|^2.
    double operator()(std::span<const cplx> subcarrier_symbols);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// 1 - (1 - e^-gamma)^n_S, gamma linear.
double gaussian_papr_ccdf(double gamma, std::size_t n_subcarriers);

struct PaprOptions {
    std::size_t n_subcarriers = 72;
    std::size_t symbols = 1'000'000;
    std::uint64_t seed = 1;
    std::size_t oversampling = 1;
    /// OFDM symbol l uses column l mod n_T of the allocation.
    const SipAllocation* sip = nullptr;
};

/// PAPR in dB of random OFDM symbols. Chunks of symbols carry their own
/// seeds, so results do not depend on the thread count.
std::vector<double> papr_samples(const Constellation& c, const PaprOptions& options);
/// Same values, one thread.
std::vector<double> papr_samples_serial(const Constellation& c, const PaprOptions& options);

struct CdfTable {
    std::vector<double> papr_db;
    std::vector<double> cdf;
};

/// Empirical CDF evaluated on `grid_db`.
CdfTable empirical_cdf(std::vector<double> samples_db, const std::vector<double>& grid_db);
/// sup |F_a - F_b| over the shared grid.
double sup_distance(const CdfTable& a, const CdfTable& b);

struct RateEstimate {
    double bce_total = 0.0;  ///< bits per frame
    double rate = 0.0;       ///< bits per frame, n_D m - bce_total
    std::size_t samples = 0;
    std::size_t bits_per_frame = 0;
    bool clamped = false;    ///< some posterior fell below the clamp
};

inline constexpr double kPosteriorFloor = 1e-12;

/// q[l * bits_per_frame + j] = Q(b_true | y) for bit j of frame l.
RateEstimate estimate_rate(std::span<const double> q_truth, std::size_t bits_per_frame);
/// Posteriors from LLRs (ln P1/P0) and the transmitted bits.
RateEstimate estimate_rate_from_llrs(std::span<const double> llrs, std::span<const std::uint8_t> truth,
                                     std::size_t bits_per_frame);

}  // namespace ofdmlink
