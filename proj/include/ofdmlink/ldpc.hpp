#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace ofdmlink {

/// Binary LDPC code given by its parity-check matrix, with a systematic-form
/// encoder derived by GF(2) elimination and a flooding sum-product decoder.
///
/// LLR convention everywhere: LLR = ln P(b=1) / P(b=0).
class LdpcCode {
public:
    /// checks[r] lists the variable indices of check r.
    LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> checks);

    /// Quasi-cyclic expansion; shift -1 is an all-zero block, shift s maps
    /// row i of the block to column (i + s) mod lifting.
    static LdpcCode from_base_matrix(const std::vector<std::vector<int>>& base, std::size_t lifting);
    /// Base matrix file: `lifting Z` line, then whitespace-separated shift rows; '#' comments.
    static LdpcCode from_base_matrix_file(const std::filesystem::path& path);
    static LdpcCode from_alist(const std::filesystem::path& path);
    void save_alist(const std::filesystem::path& path) const;

    [[nodiscard]] std::size_t length() const noexcept { return n_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return info_positions_.size(); }
    [[nodiscard]] std::size_t check_count() const noexcept { return checks_.size(); }
    [[nodiscard]] double rate() const noexcept {
        return static_cast<double>(dimension()) / static_cast<double>(length());
    }
    [[nodiscard]] const std::vector<std::vector<std::uint32_t>>& checks() const noexcept { return checks_; }
    /// Codeword positions carrying the information bits, in order.
    [[nodiscard]] const std::vector<std::uint32_t>& info_positions() const noexcept { return info_positions_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return edge_var_.size(); }

    [[nodiscard]] std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;
    [[nodiscard]] bool is_codeword(std::span<const std::uint8_t> bits) const;
    [[nodiscard]] std::vector<std::uint8_t> extract_info(std::span<const std::uint8_t> codeword) const;

    /// Flat edge layout grouped by check (CSR); used by the decoder.
    [[nodiscard]] const std::vector<std::uint32_t>& check_offsets() const noexcept { return check_ptr_; }
    [[nodiscard]] const std::vector<std::uint32_t>& edge_variables() const noexcept { return edge_var_; }

private:
    void build_edges();
    void build_encoder();

    std::size_t n_;
    std::vector<std::vector<std::uint32_t>> checks_;
    std::vector<std::uint32_t> check_ptr_;
    std::vector<std::uint32_t> edge_var_;
    std::vector<std::uint32_t> info_positions_;
    std::vector<std::uint32_t> parity_positions_;
    std::size_t info_words_ = 0;
    /// parity_positions_[r] = XOR of info bits selected by generator_[r].
    std::vector<std::vector<std::uint64_t>> generator_;
};

/// IEEE 802.11n, n = 1944, rate 2/3, from the packaged base matrix.
const LdpcCode& ieee80211n_1944_r23();

/// 12 x 24 code with a cycle-free Tanner graph, for exact-marginal tests.
LdpcCode toy_tree_code();

struct DecodeOptions {
    int max_iterations = 40;
    bool early_exit = true;
};

struct DecodeResult {
    std::vector<std::uint8_t> hard_bits;
    std::vector<double> output_llrs;  ///< posterior: channel + prior + check messages
    int iterations_used = 0;
    bool converged = false;
};

inline constexpr double kLlrClamp = 30.0;

/// Flooding sum-product (tanh rule). Inputs are clamped at +-30.
DecodeResult decode(const LdpcCode& code, std::span<const double> channel_llrs, const DecodeOptions& options = {},
                    std::span<const double> prior_llrs = {});

}  // namespace ofdmlink
