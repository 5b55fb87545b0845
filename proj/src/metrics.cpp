#include "ofdmlink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fftw3.h>

#include "ofdmlink/error.hpp"
#include "ofdmlink/rng.hpp"

namespace ofdmlink {

namespace {

double channel_energy(const ComplexGrid& h) {
    double e = 0.0;
    for (const auto& v : h.values()) e += std::norm(v);
    return e;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive");
}

}  // namespace

double eb_over_sigma2(const ComplexGrid& h, double sigma2, double rho, std::size_t m, double code_rate) {
    require_positive(sigma2, "eb_over_sigma2: sigma2");
    require_positive(rho, "eb_over_sigma2: rho");
    require_positive(code_rate, "eb_over_sigma2: code rate");
    if (m == 0) throw DomainError("eb_over_sigma2: m must be positive");
    const double n = static_cast<double>(h.size());
    return channel_energy(h) / (rho * n * static_cast<double>(m) * code_rate * sigma2);
}

double es_over_sigma2(const ComplexGrid& h, double sigma2) {
    require_positive(sigma2, "es_over_sigma2: sigma2");
    return channel_energy(h) / (static_cast<double>(h.size()) * sigma2);
}

double goodput(double code_rate, double rho, std::size_t m, std::size_t n, double ber) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw DomainError("goodput: BER outside [0, 1]");
    return code_rate * rho * static_cast<double>(m) * static_cast<double>(n) * (1.0 - ber);
}

double sigma2_for_eb_db(double eb_db, double rho, std::size_t m, double code_rate) {
    require_positive(rho, "sigma2_for_eb_db: rho");
    require_positive(code_rate, "sigma2_for_eb_db: code rate");
    return 1.0 / (rho * static_cast<double>(m) * code_rate * db_to_linear(eb_db));
}

double sigma2_for_es_db(double es_db) { return 1.0 / db_to_linear(es_db); }

void BerAccumulator::add_codeword(std::uint64_t errors, std::uint64_t bits) {
    if (errors > bits) throw DomainError("BerAccumulator: more errors than bits");
    errors_ += errors;
    bits_ += bits;
    ++codewords_;
    sum_sq_ += static_cast<double>(errors) * static_cast<double>(errors);
}

void BerAccumulator::merge(const BerAccumulator& other) {
    errors_ += other.errors_;
    bits_ += other.bits_;
    codewords_ += other.codewords_;
    sum_sq_ += other.sum_sq_;
}

double BerAccumulator::ber() const noexcept {
    return bits_ == 0 ? 0.0 : static_cast<double>(errors_) / static_cast<double>(bits_);
}

double BerAccumulator::standard_error() const noexcept {
    if (codewords_ < 2 || bits_ == 0) return 0.0;
    const double c = static_cast<double>(codewords_);
    const double mean = static_cast<double>(errors_) / c;
    const double var = std::max(0.0, (sum_sq_ - c * mean * mean) / (c - 1.0));
    const double bits_per_cw = static_cast<double>(bits_) / c;
    return std::sqrt(var / c) / bits_per_cw;
}

ConfidenceInterval BerAccumulator::interval(double z) const noexcept {
    const double p = ber();
    const double half = z * standard_error();
    return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

void PairedDifference::add_codeword(std::uint64_t errors_a, std::uint64_t errors_b, std::uint64_t bits) {
    const double d = static_cast<double>(errors_a) - static_cast<double>(errors_b);
    ++codewords_;
    bits_ += bits;
    sum_ += d;
    sum_sq_ += d * d;
}

void PairedDifference::merge(const PairedDifference& other) {
    codewords_ += other.codewords_;
    bits_ += other.bits_;
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
}

double PairedDifference::mean() const noexcept {
    return bits_ == 0 ? 0.0 : sum_ / static_cast<double>(bits_);
}

double PairedDifference::standard_error() const noexcept {
    if (codewords_ < 2 || bits_ == 0) return 0.0;
    const double c = static_cast<double>(codewords_);
    const double mean = sum_ / c;
    const double var = std::max(0.0, (sum_sq_ - c * mean * mean) / (c - 1.0));
    return std::sqrt(var / c) / (static_cast<double>(bits_) / c);
}

struct PaprMeter::Impl {
    std::size_t n_s = 0;
    std::size_t len = 0;
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
};

PaprMeter::PaprMeter(std::size_t n_subcarriers, std::size_t oversampling) : impl_(std::make_unique<Impl>()) {
    if (n_subcarriers == 0 || oversampling == 0) throw DomainError("PaprMeter: sizes must be positive");
    impl_->n_s = n_subcarriers;
    impl_->len = n_subcarriers * oversampling;
    impl_->in = fftw_alloc_complex(impl_->len);
    impl_->out = fftw_alloc_complex(impl_->len);
    // The FFTW planner is not thread-safe.
#pragma omp critical(ofdmlink_fftw_planner)
    impl_->plan = fftw_plan_dft_1d(static_cast<int>(impl_->len), impl_->in, impl_->out, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t t = 0; t < impl_->len; ++t) impl_->in[t][0] = impl_->in[t][1] = 0.0;
}

PaprMeter::~PaprMeter() {
#pragma omp critical(ofdmlink_fftw_planner)
    fftw_destroy_plan(impl_->plan);
    fftw_free(impl_->in);
    fftw_free(impl_->out);
}

double PaprMeter::operator()(std::span<const cplx> subcarrier_symbols) {
    if (subcarrier_symbols.size() != impl_->n_s) throw DimensionError("PaprMeter: wrong subcarrier count");
    for (std::size_t s = 0; s < impl_->n_s; ++s) {
        impl_->in[s][0] = subcarrier_symbols[s].real();
        impl_->in[s][1] = subcarrier_symbols[s].imag();
    }
    fftw_execute(impl_->plan);
    double peak = 0.0, sum = 0.0;
    for (std::size_t t = 0; t < impl_->len; ++t) {
        const double p = impl_->out[t][0] * impl_->out[t][0] + impl_->out[t][1] * impl_->out[t][1];
        peak = std::max(peak, p);
        sum += p;
    }
    if (!(sum > 0.0)) throw DomainError("PaprMeter: all-zero OFDM symbol");
    return peak / (sum / static_cast<double>(impl_->len));
}

double gaussian_papr_ccdf(double gamma, std::size_t n_subcarriers) {
    return 1.0 - std::pow(1.0 - std::exp(-gamma), static_cast<double>(n_subcarriers));
}

namespace {

constexpr std::size_t kPaprChunk = 4096;

void check_papr_options(const Constellation& c, const PaprOptions& o) {
    if (c.size() == 0) throw DomainError("papr: empty constellation");
    if (o.symbols == 0) throw DomainError("papr: symbol count must be positive");
    if (o.sip != nullptr && o.sip->fraction.dims().n_subcarriers != o.n_subcarriers) {
        throw DimensionError("papr: SIP allocation subcarrier count differs");
    }
}

void papr_chunk(const Constellation& c, const PaprOptions& o, std::size_t chunk, PaprMeter& meter,
                std::vector<cplx>& sym, std::vector<double>& out) {
    Rng rng(derive_seed(o.seed, chunk));
    std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
    const std::size_t begin = chunk * kPaprChunk;
    const std::size_t end = std::min(o.symbols, begin + kPaprChunk);
    for (std::size_t l = begin; l < end; ++l) {
        for (std::size_t s = 0; s < o.n_subcarriers; ++s) {
            cplx x = c.point(pick(rng));
            if (o.sip != nullptr) {
                const std::size_t t = l % o.sip->fraction.dims().n_symbols;
                const double a = o.sip->fraction(s, t);
                x = std::sqrt(1.0 - a) * x + std::sqrt(a) * o.sip->pilot(s, t);
            }
            sym[s] = x;
        }
        out[l] = linear_to_db(meter(sym));
    }
}

}  // namespace

std::vector<double> papr_samples(const Constellation& c, const PaprOptions& options) {
    check_papr_options(c, options);
    std::vector<double> out(options.symbols);
    const auto chunks = static_cast<std::ptrdiff_t>((options.symbols + kPaprChunk - 1) / kPaprChunk);
#pragma omp parallel
    {
        PaprMeter meter(options.n_subcarriers, options.oversampling);
        std::vector<cplx> sym(options.n_subcarriers);
#pragma omp for schedule(dynamic)
        for (std::ptrdiff_t ch = 0; ch < chunks; ++ch) {
            papr_chunk(c, options, static_cast<std::size_t>(ch), meter, sym, out);
        }
    }
    return out;
}

std::vector<double> papr_samples_serial(const Constellation& c, const PaprOptions& options) {
    check_papr_options(c, options);
    std::vector<double> out(options.symbols);
    PaprMeter meter(options.n_subcarriers, options.oversampling);
    std::vector<cplx> sym(options.n_subcarriers);
    const std::size_t chunks = (options.symbols + kPaprChunk - 1) / kPaprChunk;
    for (std::size_t ch = 0; ch < chunks; ++ch) papr_chunk(c, options, ch, meter, sym, out);
    return out;
}

CdfTable empirical_cdf(std::vector<double> samples_db, const std::vector<double>& grid_db) {
    if (samples_db.empty()) throw DomainError("empirical_cdf: no samples");
    std::sort(samples_db.begin(), samples_db.end());
    CdfTable t;
    t.papr_db = grid_db;
    t.cdf.reserve(grid_db.size());
    const double count = static_cast<double>(samples_db.size());
    for (double g : grid_db) {
        const auto below = std::upper_bound(samples_db.begin(), samples_db.end(), g) - samples_db.begin();
        t.cdf.push_back(static_cast<double>(below) / count);
    }
    return t;
}

double sup_distance(const CdfTable& a, const CdfTable& b) {
    if (a.papr_db != b.papr_db) throw DimensionError("sup_distance: CDF grids differ");
    double d = 0.0;
    for (std::size_t i = 0; i < a.cdf.size(); ++i) d = std::max(d, std::abs(a.cdf[i] - b.cdf[i]));
    return d;
}

RateEstimate estimate_rate(std::span<const double> q_truth, std::size_t bits_per_frame) {
    if (bits_per_frame == 0 || q_truth.empty() || q_truth.size() % bits_per_frame != 0) {
        throw DimensionError("estimate_rate: posterior count must be a positive multiple of bits_per_frame");
    }
    RateEstimate r;
    r.bits_per_frame = bits_per_frame;
    r.samples = q_truth.size() / bits_per_frame;
    double sum = 0.0;
    for (double q : q_truth) {
        if (!(q <= 1.0) || std::isnan(q) || q < 0.0) throw DomainError("estimate_rate: posterior outside [0, 1]");
        if (q < kPosteriorFloor) {
            q = kPosteriorFloor;
            r.clamped = true;
        }
        sum -= std::log2(q);
    }
    r.bce_total = sum / static_cast<double>(r.samples);
    r.rate = static_cast<double>(bits_per_frame) - r.bce_total;
    return r;
}

RateEstimate estimate_rate_from_llrs(std::span<const double> llrs, std::span<const std::uint8_t> truth,
                                     std::size_t bits_per_frame) {
    if (llrs.size() != truth.size()) throw DimensionError("estimate_rate_from_llrs: LLR and bit counts differ");
    std::vector<double> q(llrs.size());
    for (std::size_t j = 0; j < llrs.size(); ++j) {
        // Q(b | y) = 1 / (1 + exp(-s LLR)), s = +1 for b = 1.
        const double s = truth[j] ? llrs[j] : -llrs[j];
        q[j] = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    }
    return estimate_rate(q, bits_per_frame);
}

}  // namespace ofdmlink
