#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ofdmlink/grid.hpp"
#include "ofdmlink/ldpc.hpp"
#include "ofdmlink/modem.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

struct ChannelEstimate {
    ComplexGrid h_hat;
    /// Diagonal of the error covariance, clamped at zero.
    ResourceGrid<double> err_var;
    std::optional<Eigen::MatrixXcd> err_cov;
};

/// Genie estimate: h_hat = h, zero error.
ChannelEstimate perfect_estimate(const ComplexGrid& h);

/// Pilot-only LMMSE from the n_P x n_P system; the full covariance is kept if asked.
ChannelEstimate lmmse_estimate(const Eigen::MatrixXcd& covariance, const PilotPattern& pattern, const ComplexGrid& y,
                               double sigma2, bool keep_full = false);

enum class LlrRole { demapper_total, demapper_extrinsic, decoder_prior, decoder_extrinsic };

/// n * m values, entry (flat_re * m + i). mask[k] is set on REs that carry LLRs;
/// unmasked entries stay zero.
struct LlrGrid {
    OfdmDims dims;
    std::size_t m = 0;
    LlrRole role = LlrRole::demapper_total;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    [[nodiscard]] double at(std::size_t re, std::size_t i) const { return values[re * m + i]; }
    double& at(std::size_t re, std::size_t i) { return values[re * m + i]; }
};

/// Zero grid masked to the data REs of `pattern`.
LlrGrid make_llr_grid(const PilotPattern& pattern, std::size_t m, LlrRole role);
/// Wraps a frame of values; entries outside the data REs must be zero.
LlrGrid llr_grid_from_frame(const PilotPattern& pattern, std::size_t m, LlrRole role, LlrFrame values);

/// Exact log-sum-exp demapping with effective noise err_var + sigma2. Serial.
LlrGrid gaussian_demap(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est, double sigma2,
                       const PilotPattern& pattern);
/// Same result, REs split across OpenMP threads.
LlrGrid gaussian_demap_parallel(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est,
                                double sigma2, const PilotPattern& pattern);

struct SymbolPrior {
    std::size_t m = 0;
    /// 2^m probabilities per RE; all zero at pilot REs.
    std::vector<double> probs;
    std::vector<std::uint8_t> deterministic;
    std::vector<cplx> mean;
    std::vector<double> energy;

    [[nodiscard]] std::size_t size() const noexcept { return mean.size(); }
};

/// Softmax of sum_i c_u^(i) LLR_P(k, i); pilot REs are point masses on the pilot.
SymbolPrior prior_from_llrs(const Constellation& c, const LlrGrid& prior_llrs, const PilotPattern& pattern);

/// Data-aided LMMSE on the full n x n system: M = R o E{xx^H} + sigma2 I.
ChannelEstimate data_aided_estimate(const Eigen::MatrixXcd& covariance, const ComplexGrid& y,
                                    const SymbolPrior& prior, double sigma2, bool keep_full = false);

struct IeddLlrs {
    LlrGrid total;
    LlrGrid extrinsic;  ///< total - prior
};

IeddLlrs iedd_demap(const Constellation& c, const ComplexGrid& y, const ChannelEstimate& est, double sigma2,
                    const LlrGrid& prior_llrs);

/// SIP with known channel: removes the pilot term and scales the channel.
/// Returns (Y - H o sqrt(A) P, H o sqrt(1 - A)).
std::pair<ComplexGrid, ComplexGrid> sip_strip_pilot(const ComplexGrid& y, const ComplexGrid& h,
                                                    const SipAllocation& alloc);

enum class ReceiverKind { perfect_csi, non_iterative, iedd };

ReceiverKind parse_receiver_kind(const std::string& name);
std::string to_string(ReceiverKind kind);

struct ReceiverSettings {
    int bp_iterations = 40;
    int outer_iterations = 4;
    int inner_bp_iterations = 10;
    /// Ends IEDD early once every codeword of the block satisfies its checks.
    bool stop_on_convergence = true;
};

struct ReceiverContext {
    const Constellation* constellation = nullptr;
    const PilotPattern* pattern = nullptr;
    const FramePlan* plan = nullptr;
    const LdpcCode* code = nullptr;
    ReceiverSettings settings;
};

/// One block of frames_per_block frames.
struct BlockObservation {
    std::vector<ComplexGrid> y;
    std::vector<ComplexGrid> h;
    /// Receiver covariance per frame (may all point at one matrix).
    std::vector<const Eigen::MatrixXcd*> covariance;
    double sigma2 = 0.0;
    const SipAllocation* sip = nullptr;
};

struct ReceiverOutput {
    std::vector<std::vector<std::uint8_t>> codewords;
    /// Demapper output fed to the first decoding pass, at decoder precision.
    std::vector<LlrFrame> channel_llrs;
    int outer_iterations_used = 0;
};

/// LLRs are rounded to single precision before decoding, the precision of the
/// tensor interchange format; in-process and file-based decoding then agree bit for bit.
void round_to_decoder_precision(LlrFrame& llrs);

/// Disassembles, decodes each codeword and returns hard decisions.
std::vector<std::vector<std::uint8_t>> decode_block(const LdpcCode& code, const FramePlan& plan,
                                                    const std::vector<LlrFrame>& llrs, int bp_iterations);

ReceiverOutput run_receiver(ReceiverKind kind, const ReceiverContext& ctx, const BlockObservation& obs);

}  // namespace ofdmlink
