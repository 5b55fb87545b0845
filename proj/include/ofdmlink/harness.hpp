#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ofdmlink/channel.hpp"
#include "ofdmlink/config.hpp"
#include "ofdmlink/grid.hpp"
#include "ofdmlink/ldpc.hpp"
#include "ofdmlink/metrics.hpp"
#include "ofdmlink/modem.hpp"
#include "ofdmlink/rx.hpp"
#include "ofdmlink/tensor.hpp"

namespace ofdmlink {

/// R_hat = (1/S) sum h h^H over channels drawn from `spec`. Samples are cut
/// into fixed chunks with their own seeds and summed in a fixed lane order,
/// so the result is identical for any worker count.
Eigen::MatrixXcd estimate_correlation(const OfdmDims& dims, const RadioParams& radio, const CovarianceSpec& spec,
                                      int workers = 1);
/// Single-threaded reference; same bits as estimate_correlation.
Eigen::MatrixXcd estimate_correlation_serial(const OfdmDims& dims, const RadioParams& radio,
                                             const CovarianceSpec& spec);

/// Everything the sweep shares read-only across workers.
struct Scenario {
    ScenarioConfig config;
    RadioParams radio;
    std::vector<PowerDelayProfile> pdps;
    Constellation constellation;
    PilotPattern pattern;
    FramePlan plan;
    const LdpcCode* code = nullptr;
    std::optional<SipAllocation> sip;
    /// Empirical receiver covariance, rounded to the tensor file precision.
    Eigen::MatrixXcd covariance;
};

/// Loads files, builds the plan and, when an estimating receiver uses the
/// empirical covariance, reads `covariance_file` or estimates it.
Scenario prepare_scenario(const ScenarioConfig& config, int workers = 1);

/// Smallest frame count whose capacity holds one codeword.
std::size_t frames_for_one_codeword(const PilotPattern& pattern, std::size_t bits_per_symbol,
                                    std::size_t code_length);

/// Noise variance of one sweep point.
double point_sigma2(const Scenario& s, double snr_db);

struct ReceiverPoint {
    ReceiverKind kind = ReceiverKind::perfect_csi;
    BerAccumulator ber;
    std::vector<std::uint32_t> codeword_errors;  ///< in block order
};

struct SweepPoint {
    double snr_db = 0.0;
    double sigma2 = 0.0;
    double mean_eb_over_sigma2 = 0.0;  ///< realized, linear
    double mean_es_over_sigma2 = 0.0;
    std::vector<ReceiverPoint> receivers;
};

struct SweepResult {
    std::size_t frames = 0;
    std::size_t info_bits_per_codeword = 0;
    std::vector<SweepPoint> points;
};

struct SweepOptions {
    int workers = 1;
    /// Writes plan.json, bits.tensor and one LLR tensor per (point, receiver).
    std::optional<std::filesystem::path> dump_dir;
};

/// Frame-parallel Monte Carlo. Every random draw comes from a seed derived
/// from (master seed, block index), and channels, bits and unit-variance
/// noise are shared by all points and receivers.
SweepResult run_sweep(const Scenario& s, const SweepOptions& options = {});

/// Whether a BER point is reported (enough errors, or forced).
bool reportable(const BerAccumulator& ber, const ScenarioConfig& config);

/// `snr_db,ber,ci_low,ci_high`; unreportable points print nan.
void write_ber_csv(const SweepResult& r, std::size_t receiver, const ScenarioConfig& config,
                   const std::filesystem::path& path);
/// `snr_db,goodput`.
void write_goodput_csv(const SweepResult& r, std::size_t receiver, const Scenario& s,
                       const std::filesystem::path& path);

struct EvalResult {
    BerAccumulator ber;
    double goodput = 0.0;
    std::size_t frames = 0;
};

/// Decodes an LLR tensor [frames, n_T, n_S, m] against a bit tensor of the
/// same shape, using the plan JSON written by the sweep.
EvalResult eval_llrs(const nlohmann::json& plan_json, const Tensor& llrs, const Tensor& bits, int bp_iterations = 40);

/// Tensor [frames, n_T, n_S, m] from per-frame LLR or bit vectors.
Tensor frames_to_tensor(const std::vector<std::vector<double>>& frames, const OfdmDims& dims, std::size_t m);
std::vector<LlrFrame> tensor_to_frames(const Tensor& t, const OfdmDims& dims, std::size_t m);

/// Writes y.tensor, h.tensor (c64 [frames, n_T, n_S]), bits.tensor, plan.json
/// and meta.json for one point, drawn exactly as run_sweep draws them.
void generate_frames(const Scenario& s, double snr_db, std::size_t frames, const std::filesystem::path& out_dir);

}  // namespace ofdmlink
