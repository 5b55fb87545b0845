#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ofdmlink/data.hpp"
#include "ofdmlink/rng.hpp"
#include "ofdmlink/types.hpp"

namespace ofdmlink {

inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Zero-order Bessel function of the first kind. Power series below |x| = 12,
/// Hankel asymptotic expansion above. Absolute error below 1e-8 on |x| <= 1e4.
double bessel_j0(double x);

struct RadioParams {
    double carrier_hz = 2.6e9;
    double symbol_duration_s = 1.0 / 15e3 + 5.2e-6;  ///< includes the cyclic prefix
    double subcarrier_spacing_hz = 15e3;

    /// Symbol duration derived as 1/spacing + cyclic prefix.
    static RadioParams from_numerology(double carrier_hz, double subcarrier_spacing_hz, double cyclic_prefix_s);
    void validate() const;
};

struct PdpTap {
    double tau;    ///< delay normalized to unit delay spread
    double power;  ///< linear
};

class PowerDelayProfile {
public:
    PowerDelayProfile() = default;

    /// Sorts taps by delay and rescales powers to sum to one.
    static PowerDelayProfile normalized(std::string name, std::vector<PdpTap> taps);
    /// Exponential profile with `taps` equally spaced delays, rescaled to unit RMS delay spread.
    static PowerDelayProfile synthetic_exponential(std::size_t taps = 8);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::vector<PdpTap>& taps() const noexcept { return taps_; }
    [[nodiscard]] double rms_delay() const;

private:
    std::string name_;
    std::vector<PdpTap> taps_;
};

/// Reads `tau_normalized,power_db` rows; the header names the profile
/// (`# profile: TDL-A`). Powers are converted to linear and normalized.
PowerDelayProfile load_pdp(const std::filesystem::path& path);

/// TDL-A/B/C from the data directory, or "synthetic-exp".
PowerDelayProfile named_pdp(const std::string& name);

struct MobilitySpec {
    double speed_mps = 0.0;
    double delay_spread_s = 0.0;
};

struct NoiseSpec {
    double sigma2;

    explicit NoiseSpec(double variance);
    /// Accepts sigma2 = 0, for noiseless test scenarios.
    static NoiseSpec allow_zero(double variance);

private:
    struct Unchecked {};
    NoiseSpec(double variance, Unchecked) : sigma2(variance) {}
};

/// [R_T]_{i,k} = J0(2 pi (v/c) f_c dT (i-k)).
Eigen::MatrixXd time_correlation(const OfdmDims& dims, const RadioParams& radio, double speed_mps);

/// [R_F]_{i,k} = sum_l S_l exp(j 2 pi tau_l Ds dF (i-k)).
Eigen::MatrixXcd freq_correlation(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                                  double delay_spread_s);

/// Kronecker-separable channel covariance, kept in factored form.
///
/// With vec() running over subcarriers fastest, the full covariance of
/// h = vec(H) is kron(R_T, R_F); entry (s + nS t, s' + nS t') equals
/// R_F(s, s') R_T(t, t'). Eigenpairs of the full matrix are Kronecker
/// products of the factor eigenpairs.
class CorrelationModel {
public:
    CorrelationModel(OfdmDims dims, Eigen::MatrixXd time_corr, Eigen::MatrixXcd freq_corr);

    [[nodiscard]] const OfdmDims& dims() const noexcept { return dims_; }
    [[nodiscard]] const Eigen::MatrixXd& time_corr() const noexcept { return r_time_; }
    [[nodiscard]] const Eigen::MatrixXcd& freq_corr() const noexcept { return r_freq_; }

    [[nodiscard]] const Eigen::MatrixXd& time_eigenvectors() const noexcept { return u_time_; }
    [[nodiscard]] const Eigen::VectorXd& time_eigenvalues() const noexcept { return lambda_time_; }
    [[nodiscard]] const Eigen::MatrixXcd& freq_eigenvectors() const noexcept { return u_freq_; }
    [[nodiscard]] const Eigen::VectorXd& freq_eigenvalues() const noexcept { return lambda_freq_; }

    /// Clamped eigenvalues of the full n x n matrix, in vec() order of the factors.
    [[nodiscard]] Eigen::VectorXd eigenvalues() const;
    [[nodiscard]] Eigen::MatrixXcd eigenvectors() const;
    /// Full n x n covariance.
    [[nodiscard]] Eigen::MatrixXcd full() const;
    /// Eigenvalue mass removed by the PSD clamp.
    [[nodiscard]] double clamped_mass() const noexcept { return clamped_mass_; }

private:
    OfdmDims dims_;
    Eigen::MatrixXd r_time_;
    Eigen::MatrixXcd r_freq_;
    Eigen::MatrixXd u_time_;
    Eigen::VectorXd lambda_time_;
    Eigen::MatrixXcd u_freq_;
    Eigen::VectorXd lambda_freq_;
    double clamped_mass_ = 0.0;
};

CorrelationModel build_correlation(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                                   const MobilitySpec& mobility);

/// h = U Lambda^{1/2} n, n ~ CN(0, I), reshaped to the grid.
ComplexGrid sample_channel(const CorrelationModel& model, Rng& rng);

/// Draws one realization without an n_S x n_S eigensolve: the frequency factor
/// is the rank-L tap steering matrix. Same distribution as sample_channel on
/// build_correlation(dims, radio, pdp, mobility).
ComplexGrid draw_channel(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                         const MobilitySpec& mobility, Rng& rng);

/// Y = H o X + W with W ~ CN(0, sigma2) i.i.d.
ComplexGrid apply_channel(const ComplexGrid& h, const ComplexGrid& x, const NoiseSpec& noise, Rng& rng);

}  // namespace ofdmlink
