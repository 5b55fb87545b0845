#include "ofdmlink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#ifndef OFDMLINK_DATA_DIR
#define OFDMLINK_DATA_DIR "data"
#endif

namespace ofdmlink {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

double bessel_j0(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
    return std::cyl_bessel_j(0.0, std::abs(x));
}

RadioParams RadioParams::from_numerology(double carrier_hz, double subcarrier_spacing_hz, double cyclic_prefix_s) {
    RadioParams r;
    r.carrier_hz = carrier_hz;
    r.subcarrier_spacing_hz = subcarrier_spacing_hz;
    r.symbol_duration_s = 1.0 / subcarrier_spacing_hz + cyclic_prefix_s;
    r.validate();
    return r;
}

void RadioParams::validate() const {
    if (!(carrier_hz > 0.0) || !(symbol_duration_s > 0.0) || !(subcarrier_spacing_hz > 0.0)) {
        throw DomainError("RadioParams: all quantities must be strictly positive");
    }
}

PowerDelayProfile PowerDelayProfile::normalized(std::string name, std::vector<PdpTap> taps) {
    if (taps.empty()) throw DomainError("PowerDelayProfile: at least one tap required");
    double total = 0.0;
    for (const auto& t : taps) {
        if (!(t.tau >= 0.0) || !(t.power >= 0.0) || !std::isfinite(t.tau) || !std::isfinite(t.power)) {
            throw DomainError("PowerDelayProfile: delays and powers must be finite and non-negative");
        }
        total += t.power;
    }
    if (!(total > 0.0)) throw DomainError("PowerDelayProfile: total power is zero");
    std::stable_sort(taps.begin(), taps.end(), [](const PdpTap& a, const PdpTap& b) { return a.tau < b.tau; });
    for (auto& t : taps) t.power /= total;
    PowerDelayProfile pdp;
    pdp.name_ = std::move(name);
    pdp.taps_ = std::move(taps);
    return pdp;
}

PowerDelayProfile PowerDelayProfile::synthetic_exponential(std::size_t taps) {
    if (taps == 0) throw DomainError("synthetic_exponential: tap count must be positive");
    std::vector<PdpTap> v;
    v.reserve(taps);
    for (std::size_t l = 0; l < taps; ++l) {
        const double frac = taps > 1 ? static_cast<double>(l) / static_cast<double>(taps - 1) : 0.0;
        v.push_back({static_cast<double>(l), std::pow(10.0, -2.0 * frac)});  // last tap at -20 dB
    }
    auto pdp = normalized("synthetic-exp", std::move(v));
    const double rms = pdp.rms_delay();
    if (rms > 0.0) {
        for (auto& t : pdp.taps_) t.tau /= rms;
    }
    return pdp;
}

double PowerDelayProfile::rms_delay() const {
    double mean = 0.0;
    for (const auto& t : taps_) mean += t.power * t.tau;
    double var = 0.0;
    for (const auto& t : taps_) var += t.power * (t.tau - mean) * (t.tau - mean);
    return std::sqrt(var);
}

PowerDelayProfile load_pdp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_pdp: cannot open " + path.string());
    std::string name;
    bool header_seen = false;
    std::vector<PdpTap> taps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("profile:");
            if (pos != std::string::npos) name = trim(line.substr(pos + 8));
            continue;
        }
        if (!header_seen) {
            if (line != "tau_normalized,power_db") {
                throw FormatError("load_pdp: expected header 'tau_normalized,power_db' in " + path.string());
            }
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b)) {
            throw FormatError("load_pdp: malformed row " + std::to_string(line_no) + " in " + path.string());
        }
        try {
            taps.push_back({std::stod(a), std::pow(10.0, std::stod(b) / 10.0)});
        } catch (const std::exception&) {
            throw FormatError("load_pdp: non-numeric row " + std::to_string(line_no) + " in " + path.string());
        }
    }
    if (!header_seen || taps.empty()) throw FormatError("load_pdp: no taps in " + path.string());
    if (name.empty()) throw FormatError("load_pdp: missing '# profile:' header in " + path.string());
    return PowerDelayProfile::normalized(name, std::move(taps));
}

std::filesystem::path data_directory() {
    if (const char* env = std::getenv("OFDMLINK_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return OFDMLINK_DATA_DIR;
}

PowerDelayProfile named_pdp(const std::string& name) {
    if (name == "synthetic-exp") return PowerDelayProfile::synthetic_exponential();
    std::string file;
    if (name == "TDL-A") file = "tdl_a.csv";
    else if (name == "TDL-B") file = "tdl_b.csv";
    else if (name == "TDL-C") file = "tdl_c.csv";
    else throw ConfigError("unknown power delay profile '" + name + "'");
    return load_pdp(data_directory() / "pdp" / file);
}

NoiseSpec::NoiseSpec(double variance) : sigma2(variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw DomainError("NoiseSpec: sigma2 must be positive");
}

NoiseSpec NoiseSpec::allow_zero(double variance) {
    if (!(variance >= 0.0) || !std::isfinite(variance)) throw DomainError("NoiseSpec: sigma2 must be >= 0");
    return NoiseSpec(variance, Unchecked{});
}

Eigen::MatrixXd time_correlation(const OfdmDims& dims, const RadioParams& radio, double speed_mps) {
    if (!(speed_mps >= 0.0)) throw DomainError("time_correlation: speed must be non-negative");
    radio.validate();
    const auto nt = static_cast<Eigen::Index>(dims.n_symbols);
    const double step = 2.0 * std::numbers::pi * (speed_mps / kSpeedOfLight) * radio.carrier_hz * radio.symbol_duration_s;
    Eigen::VectorXd lag(nt);
    for (Eigen::Index d = 0; d < nt; ++d) lag(d) = d == 0 ? 1.0 : bessel_j0(step * static_cast<double>(d));
    Eigen::MatrixXd r(nt, nt);
    for (Eigen::Index i = 0; i < nt; ++i) {
        for (Eigen::Index k = 0; k < nt; ++k) r(i, k) = lag(std::abs(i - k));
    }
    return r;
}

Eigen::MatrixXcd freq_correlation(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                                  double delay_spread_s) {
    if (!(delay_spread_s >= 0.0)) throw DomainError("freq_correlation: delay spread must be non-negative");
    radio.validate();
    const auto ns = static_cast<Eigen::Index>(dims.n_subcarriers);
    Eigen::VectorXcd lag(ns);
    for (Eigen::Index d = 0; d < ns; ++d) {
        cplx acc = 0.0;
        for (const auto& tap : pdp.taps()) {
            const double phase = 2.0 * std::numbers::pi * tap.tau * delay_spread_s * radio.subcarrier_spacing_hz *
                                 static_cast<double>(d);
            acc += tap.power * std::polar(1.0, phase);
        }
        lag(d) = acc;
    }
    Eigen::MatrixXcd r(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        for (Eigen::Index k = 0; k < ns; ++k) r(i, k) = i >= k ? lag(i - k) : std::conj(lag(k - i));
    }
    return r;
}

CorrelationModel::CorrelationModel(OfdmDims dims, Eigen::MatrixXd time_corr, Eigen::MatrixXcd freq_corr)
    : dims_(dims), r_time_(std::move(time_corr)), r_freq_(std::move(freq_corr)) {
    const auto nt = static_cast<Eigen::Index>(dims_.n_symbols);
    const auto ns = static_cast<Eigen::Index>(dims_.n_subcarriers);
    if (r_time_.rows() != nt || r_time_.cols() != nt || r_freq_.rows() != ns || r_freq_.cols() != ns) {
        throw DimensionError("CorrelationModel: factor sizes do not match dims");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_t(r_time_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig_f(r_freq_);
    if (eig_t.info() != Eigen::Success || eig_f.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "CorrelationModel: eigensolver failed (time info=" << eig_t.info() << ", freq info=" << eig_f.info()
            << ", |R_T|_F=" << r_time_.norm() << ", |R_F|_F=" << r_freq_.norm() << ")";
        throw NumericalError(msg.str());
    }
    u_time_ = eig_t.eigenvectors();
    u_freq_ = eig_f.eigenvectors();
    const Eigen::VectorXd raw_t = eig_t.eigenvalues();
    const Eigen::VectorXd raw_f = eig_f.eigenvalues();
    lambda_time_ = raw_t.cwiseMax(0.0);
    lambda_freq_ = raw_f.cwiseMax(0.0);

    double removed = 0.0;
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index s = 0; s < ns; ++s) {
            removed += std::abs(raw_t(t) * raw_f(s) - lambda_time_(t) * lambda_freq_(s));
        }
    }
    clamped_mass_ = removed;
    const double trace = r_time_.trace() * r_freq_.trace().real();
    if (removed > 1e-6 * std::max(trace, 1.0)) {
        std::ostringstream msg;
        msg << "CorrelationModel: covariance is not PSD (clamped eigenvalue mass " << removed << ", trace " << trace
            << ", min time eig " << raw_t.minCoeff() << ", min freq eig " << raw_f.minCoeff() << ")";
        throw NumericalError(msg.str());
    }
}

Eigen::VectorXd CorrelationModel::eigenvalues() const {
    const auto nt = lambda_time_.size();
    const auto ns = lambda_freq_.size();
    Eigen::VectorXd out(nt * ns);
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index s = 0; s < ns; ++s) out(s + ns * t) = lambda_time_(t) * lambda_freq_(s);
    }
    return out;
}

Eigen::MatrixXcd CorrelationModel::eigenvectors() const {
    const auto nt = u_time_.rows();
    const auto ns = u_freq_.rows();
    Eigen::MatrixXcd out(nt * ns, nt * ns);
    for (Eigen::Index a = 0; a < nt; ++a) {
        for (Eigen::Index b = 0; b < nt; ++b) out.block(a * ns, b * ns, ns, ns) = u_time_(a, b) * u_freq_;
    }
    return out;
}

Eigen::MatrixXcd CorrelationModel::full() const {
    const auto nt = r_time_.rows();
    const auto ns = r_freq_.rows();
    Eigen::MatrixXcd out(nt * ns, nt * ns);
    for (Eigen::Index a = 0; a < nt; ++a) {
        for (Eigen::Index b = 0; b < nt; ++b) out.block(a * ns, b * ns, ns, ns) = r_time_(a, b) * r_freq_;
    }
    return out;
}

CorrelationModel build_correlation(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                                   const MobilitySpec& mobility) {
    return CorrelationModel(dims, time_correlation(dims, radio, mobility.speed_mps),
                            freq_correlation(dims, radio, pdp, mobility.delay_spread_s));
}

ComplexGrid sample_channel(const CorrelationModel& model, Rng& rng) {
    const auto& dims = model.dims();
    const auto ns = static_cast<Eigen::Index>(dims.n_subcarriers);
    const auto nt = static_cast<Eigen::Index>(dims.n_symbols);
    Eigen::MatrixXcd white(ns, nt);
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index s = 0; s < ns; ++s) {
            const cplx n = complex_normal(rng);
            white(s, t) = n * std::sqrt(model.freq_eigenvalues()(s) * model.time_eigenvalues()(t));
        }
    }
    const Eigen::MatrixXcd h = model.freq_eigenvectors() * white * model.time_eigenvectors().transpose();
    ComplexGrid grid(dims);
    Eigen::Map<Eigen::MatrixXcd>(grid.data(), ns, nt) = h;
    return grid;
}

ComplexGrid draw_channel(const OfdmDims& dims, const RadioParams& radio, const PowerDelayProfile& pdp,
                         const MobilitySpec& mobility, Rng& rng) {
    const auto ns = static_cast<Eigen::Index>(dims.n_subcarriers);
    const auto nt = static_cast<Eigen::Index>(dims.n_symbols);
    const auto taps = static_cast<Eigen::Index>(pdp.taps().size());

    Eigen::MatrixXcd steer(ns, taps);
    for (Eigen::Index l = 0; l < taps; ++l) {
        const auto& tap = pdp.taps()[static_cast<std::size_t>(l)];
        const double step = 2.0 * std::numbers::pi * tap.tau * mobility.delay_spread_s * radio.subcarrier_spacing_hz;
        const double amp = std::sqrt(tap.power);
        for (Eigen::Index s = 0; s < ns; ++s) steer(s, l) = std::polar(amp, step * static_cast<double>(s));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_t(time_correlation(dims, radio, mobility.speed_mps));
    if (eig_t.info() != Eigen::Success) throw NumericalError("draw_channel: time-correlation eigensolver failed");
    const Eigen::MatrixXd time_factor =
        eig_t.eigenvectors() * eig_t.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    Eigen::MatrixXcd white(taps, nt);
    for (Eigen::Index t = 0; t < nt; ++t) {
        for (Eigen::Index l = 0; l < taps; ++l) white(l, t) = complex_normal(rng);
    }
    const Eigen::MatrixXcd h = steer * white * time_factor.transpose();
    ComplexGrid grid(dims);
    Eigen::Map<Eigen::MatrixXcd>(grid.data(), ns, nt) = h;
    return grid;
}

ComplexGrid apply_channel(const ComplexGrid& h, const ComplexGrid& x, const NoiseSpec& noise, Rng& rng) {
    require_same_dims(h, x, "apply_channel");
    ComplexGrid y(h.dims());
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = h[k] * x[k] + (noise.sigma2 > 0.0 ? complex_normal(rng, noise.sigma2) : cplx{});
    }
    return y;
}

}  // namespace ofdmlink
