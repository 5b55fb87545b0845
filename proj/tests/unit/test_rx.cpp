#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ofdmlink/channel.hpp"
#include "ofdmlink/rx.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ofdmlink;
using namespace fixture;

namespace {

const RadioParams kRadio{};

Eigen::MatrixXcd small_covariance(const OfdmDims& dims, double speed, double ds) {
    return build_correlation(dims, kRadio, named_pdp("synthetic-exp"), {speed, ds}).full();
}

std::vector<double> random_llrs(std::size_t count, double scale, Rng& rng) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> v(count);
    for (auto& x : v) x = nd(rng);
    return v;
}

double clamp30(double x) { return std::clamp(x, -kLlrClamp, kLlrClamp); }

}  // namespace

TEST_CASE("perfect estimate") {
    const OfdmDims dims(3, 2);
    ComplexGrid h(dims, cplx{0.5, -1.0});
    const auto est = perfect_estimate(h);
    CHECK(est.h_hat == h);
    for (double v : est.err_var.values()) CHECK(v == 0.0);
}

TEST_CASE("LMMSE limits") {
    const OfdmDims dims(4, 3);
    const auto r = small_covariance(dims, 20.0, 300e-9);
    Rng rng(1);
    const oracle::CorrelatedSource src(r);
    const Eigen::VectorXcd h = src.draw(rng);

    SUBCASE("noiseless full observation recovers h") {
        const auto pattern = all_pilots(dims, 3);
        ComplexGrid y(dims);
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = h(static_cast<Eigen::Index>(k)) * pattern.values()[k];
        const auto est = lmmse_estimate(r + 1e-9 * Eigen::MatrixXcd::Identity(12, 12), pattern, y, 1e-12);
        CHECK((to_vec(est.h_hat) - h).norm() / h.norm() < 1e-4);
    }
    SUBCASE("huge noise returns the prior") {
        const auto pattern = some_pilots(dims, {0, 5, 6, 11});
        ComplexGrid y(dims);
        for (std::size_t k : pattern.pilot_indices()) y[k] = h(static_cast<Eigen::Index>(k)) * pattern.values()[k];
        const auto est = lmmse_estimate(r, pattern, y, 1e9, true);
        CHECK(to_vec(est.h_hat).norm() < 1e-8);
        // R - R_:P (R_PP + s2 I)^-1 R_P: = R - R_:P R_P: / s2 + O(1/s2^2).
        Eigen::MatrixXcd first = r;
        for (std::size_t p : pattern.pilot_indices()) {
            const auto i = static_cast<Eigen::Index>(p);
            first -= r.col(i) * r.row(i) / 1e9;
        }
        CHECK((*est.err_cov - first).norm() < 1e-14);
    }
    SUBCASE("no pilots") {
        CHECK_THROWS_AS(lmmse_estimate(r, make_pilot_pattern("none", dims), ComplexGrid(dims), 0.1), DomainError);
    }
    SUBCASE("covariance size") {
        CHECK_THROWS_AS(lmmse_estimate(Eigen::MatrixXcd::Identity(5, 5), some_pilots(dims, {0}), ComplexGrid(dims), 0.1),
                        DimensionError);
    }
}

TEST_CASE("LMMSE matches the regression oracle") {
    const OfdmDims dims(4, 3);
    const auto r = small_covariance(dims, 30.0, 800e-9);
    const auto pattern = some_pilots(dims, {0, 2, 9, 11});
    const double sigma2 = 0.1;
    const auto& pil = pattern.pilot_indices();

    const auto w = oracle::probe_linear(12, pil, [&](const Eigen::VectorXcd& e) {
        ComplexGrid y(dims);
        for (std::size_t k = 0; k < 12; ++k) y[k] = e(static_cast<Eigen::Index>(k));
        return to_vec(lmmse_estimate(r, pattern, y, sigma2).h_hat);
    });
    Eigen::MatrixXcd w_pilot(12, 4);
    for (std::size_t j = 0; j < 4; ++j) w_pilot.col(static_cast<Eigen::Index>(j)) = w.col(static_cast<Eigen::Index>(j));

    const oracle::CorrelatedSource src(r);
    Rng rng(2);
    const auto reg = oracle::regress(
        200'000,
        [&](Eigen::VectorXcd& h, Eigen::VectorXcd& y) {
            h = src.draw(rng);
            y.resize(4);
            for (std::size_t a = 0; a < 4; ++a) {
                y(static_cast<Eigen::Index>(a)) = h(static_cast<Eigen::Index>(pil[a])) * pattern.values()[pil[a]] +
                                                  complex_normal(rng, sigma2);
            }
        },
        w_pilot);
    CHECK(oracle::max_coefficient_error(w_pilot, reg.w) < 0.02);

    ComplexGrid y0(dims);
    const auto est = lmmse_estimate(r, pattern, y0, sigma2, true);
    CHECK(oracle::frobenius_rel(reg.error_cov, *est.err_cov) < 0.05);
    for (std::size_t k = 0; k < 12; ++k) {
        CHECK(est.err_var[k] >= 0.0);
        CHECK(est.err_var[k] <= r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real() + 1e-6);
        CHECK(est.err_var[k] == doctest::Approx((*est.err_cov)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real()));
    }
}

TEST_CASE("BPSK demapping closed form") {
    const auto c = bpsk();
    const OfdmDims dims(2, 1);
    const auto pattern = make_pilot_pattern("none", dims);
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        ComplexGrid y(dims);
        y[0] = complex_normal(rng);
        y[1] = complex_normal(rng);
        const double sigma2 = 0.1 + 0.01 * t;
        const auto llr = gaussian_demap(c, y, perfect_estimate(ComplexGrid(dims, cplx{1.0, 0.0})), sigma2, pattern);
        for (std::size_t k = 0; k < 2; ++k) CHECK(std::abs(llr.at(k, 0) - clamp30(4.0 * y[k].real() / sigma2)) < 1e-12);
    }
}

TEST_CASE("a received point decodes to its own label") {
    const auto c = gray_qam(6);
    const OfdmDims dims(64, 1);
    const auto pattern = make_pilot_pattern("none", dims);
    ComplexGrid y(dims);
    for (std::size_t u = 0; u < 64; ++u) y[u] = c.point(u);
    const auto llr = gaussian_demap(c, y, perfect_estimate(ComplexGrid(dims, cplx{1.0, 0.0})), 1e-4, pattern);
    for (std::size_t u = 0; u < 64; ++u) {
        for (std::size_t i = 0; i < 6; ++i) CHECK((llr.at(u, i) > 0) == (c.bit(u, i) == 1));
    }
}

TEST_CASE("demappers equal brute-force enumeration") {
    Rng rng(4);
    for (std::size_t m : {1, 2, 6}) {
        const auto c = m == 1 ? bpsk() : gray_qam(m);
        const OfdmDims dims(50, 21);
        const auto pattern = make_pilot_pattern("none", dims);
        ComplexGrid y(dims), h(dims);
        ChannelEstimate est{ComplexGrid(dims), ResourceGrid<double>(dims), std::nullopt};
        std::uniform_int_distribution<std::size_t> pick(0, c.size() - 1);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            est.h_hat[k] = complex_normal(rng);
            est.err_var[k] = uniform_real(rng, 0.0, 0.3);
            y[k] = est.h_hat[k] * c.point(pick(rng)) + complex_normal(rng, 0.2);
        }
        const double sigma2 = 0.15;
        const auto serial = gaussian_demap(c, y, est, sigma2, pattern);
        const auto parallel = gaussian_demap_parallel(c, y, est, sigma2, pattern);
        CHECK(serial.values == parallel.values);

        LlrGrid prior = make_llr_grid(pattern, m, LlrRole::decoder_extrinsic);
        prior.values = random_llrs(prior.values.size(), 3.0, rng);
        const auto ie = iedd_demap(c, y, est, sigma2, prior);

        double worst = 0.0, worst_iedd = 0.0, worst_ext = 0.0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const double var = est.err_var[k] + sigma2;
            const auto ref = oracle::bit_llrs(c, y[k], est.h_hat[k], var);
            const std::vector<double> pk(prior.values.begin() + static_cast<std::ptrdiff_t>(k * m),
                                         prior.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * m));
            const auto ref_p = oracle::bit_llrs(c, y[k], est.h_hat[k], var, pk);
            for (std::size_t i = 0; i < m; ++i) {
                worst = std::max(worst, std::abs(serial.at(k, i) - clamp30(ref[i])));
                worst_iedd = std::max(worst_iedd, std::abs(ie.total.at(k, i) - clamp30(ref_p[i])));
                worst_ext = std::max(worst_ext, std::abs(ie.extrinsic.at(k, i) - clamp30(ref_p[i] - pk[i])));
            }
        }
        CHECK(worst < 1e-9);
        CHECK(worst_iedd < 1e-9);
        CHECK(worst_ext < 1e-9);
    }
}

TEST_CASE("zero priors reduce IEDD demapping to Gaussian demapping") {
    const auto c = gray_qam(6);
    const OfdmDims dims(8, 14);
    const auto pattern = make_pilot_pattern("1P", dims);
    Rng rng(5);
    ComplexGrid y(dims);
    ChannelEstimate est{ComplexGrid(dims), ResourceGrid<double>(dims, 0.02), std::nullopt};
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] = complex_normal(rng);
        est.h_hat[k] = complex_normal(rng);
    }
    const auto plain = gaussian_demap(c, y, est, 0.05, pattern);
    const auto ie = iedd_demap(c, y, est, 0.05, make_llr_grid(pattern, 6, LlrRole::decoder_extrinsic));
    for (std::size_t j = 0; j < plain.values.size(); ++j) {
        CHECK(std::abs(ie.total.values[j] - plain.values[j]) < 1e-9);
        CHECK(std::abs(ie.extrinsic.values[j] - plain.values[j]) < 1e-9);
    }
    for (std::size_t k : pattern.pilot_indices()) {
        CHECK(plain.mask[k] == 0);
        CHECK(ie.total.mask[k] == 0);
        for (std::size_t i = 0; i < 6; ++i) CHECK(plain.at(k, i) == 0.0);
    }
}

TEST_CASE("a confident prior fixes the sign") {
    const auto c = gray_qam(4);
    const OfdmDims dims(1, 1);
    const auto pattern = make_pilot_pattern("none", dims);
    auto prior = make_llr_grid(pattern, 4, LlrRole::decoder_extrinsic);
    prior.at(0, 2) = 30.0;
    ComplexGrid y(dims);
    for (std::size_t u = 0; u < 16; ++u) {
        y[0] = c.point(u);
        const auto ie = iedd_demap(c, y, perfect_estimate(ComplexGrid(dims, cplx{1.0, 0.0})), 0.1, prior);
        CHECK(ie.total.at(0, 2) > 0.0);
    }
}

TEST_CASE("symbol priors from LLRs") {
    Rng rng(6);
    const OfdmDims dims(8, 14);
    const auto pattern = make_pilot_pattern("1P", dims);
    for (std::size_t m : {1, 2, 6}) {
        const auto c = m == 1 ? bpsk() : gray_qam(m);
        const std::size_t M = c.size();

        SUBCASE("zero LLRs give uniform priors") {
            const auto p = prior_from_llrs(c, make_llr_grid(pattern, m, LlrRole::decoder_prior), pattern);
            for (std::size_t k : pattern.data_indices()) {
                for (std::size_t u = 0; u < M; ++u) CHECK(p.probs[k * M + u] == doctest::Approx(1.0 / static_cast<double>(M)));
                CHECK(std::abs(p.mean[k]) < 1e-12);
                CHECK(p.energy[k] == doctest::Approx(1.0));
            }
        }
        SUBCASE("saturated LLRs pick the all-ones label") {
            auto g = make_llr_grid(pattern, m, LlrRole::decoder_prior);
            for (std::size_t k : pattern.data_indices()) {
                for (std::size_t i = 0; i < m; ++i) g.at(k, i) = 30.0;
            }
            const auto p = prior_from_llrs(c, g, pattern);
            for (std::size_t k : pattern.data_indices()) CHECK(p.probs[k * M + M - 1] > 1.0 - 1e-9);
        }
        SUBCASE("random LLRs follow the independent-bit product") {
            auto g = make_llr_grid(pattern, m, LlrRole::decoder_prior);
            for (std::size_t k : pattern.data_indices()) {
                for (std::size_t i = 0; i < m; ++i) g.at(k, i) = std::normal_distribution<double>(0.0, 4.0)(rng);
            }
            const auto p = prior_from_llrs(c, g, pattern);
            for (std::size_t k : pattern.data_indices()) {
                const std::vector<double> l(g.values.begin() + static_cast<std::ptrdiff_t>(k * m),
                                            g.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * m));
                const auto ref = oracle::product_prior(m, l);
                double sum = 0.0;
                cplx mean{};
                for (std::size_t u = 0; u < M; ++u) {
                    REQUIRE(std::abs(p.probs[k * M + u] - ref[u]) < 1e-9);
                    sum += p.probs[k * M + u];
                    mean += ref[u] * c.point(u);
                }
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(p.mean[k] - mean) < 1e-9);
                CHECK_FALSE(p.deterministic[k]);
            }
        }
        SUBCASE("pilots are point masses") {
            const auto p = prior_from_llrs(c, make_llr_grid(pattern, m, LlrRole::decoder_prior), pattern);
            for (std::size_t k : pattern.pilot_indices()) {
                CHECK(p.deterministic[k]);
                CHECK(p.mean[k] == pattern.values()[k]);
                CHECK(p.energy[k] == doctest::Approx(1.0));
            }
        }
    }
}

TEST_CASE("data-aided estimate with deterministic symbols is the all-pilot LMMSE") {
    const OfdmDims dims(4, 3);
    const auto r = small_covariance(dims, 10.0, 200e-9);
    const auto pattern = all_pilots(dims, 8);
    SymbolPrior prior;
    prior.m = 2;
    prior.probs.assign(12 * 4, 0.0);
    prior.deterministic.assign(12, 1);
    prior.energy.assign(12, 1.0);
    for (std::size_t k = 0; k < 12; ++k) prior.mean.push_back(pattern.values()[k]);
    Rng rng(7);
    ComplexGrid y(dims);
    for (std::size_t k = 0; k < 12; ++k) y[k] = complex_normal(rng);
    const auto a = data_aided_estimate(r, y, prior, 0.2, true);
    const auto b = lmmse_estimate(r, pattern, y, 0.2, true);
    CHECK((to_vec(a.h_hat) - to_vec(b.h_hat)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((*a.err_cov - *b.err_cov).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("data-aided estimate with zero priors is the pilot-only LMMSE") {
    const OfdmDims dims(8, 14);
    const auto r = build_correlation(dims, kRadio, named_pdp("TDL-A"), {3.0, 100e-9}).full();
    const auto pattern = make_pilot_pattern("1P", dims);
    const auto c = gray_qam(6);
    const auto prior = prior_from_llrs(c, make_llr_grid(pattern, 6, LlrRole::decoder_prior), pattern);
    Rng rng(8);
    ComplexGrid y(dims);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = complex_normal(rng);
    const auto a = data_aided_estimate(r, y, prior, 0.05);
    const auto b = lmmse_estimate(r, pattern, y, 0.05);
    CHECK((to_vec(a.h_hat) - to_vec(b.h_hat)).cwiseAbs().maxCoeff() < 1e-9);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(a.err_var[k] - b.err_var[k]) < 1e-9);
}

namespace {

/// Mixed or uniform priors on a 4x3 grid with 4 pilots, compared to regression on sampled symbols.
void check_data_aided_oracle(bool uniform, std::size_t samples, std::uint64_t seed) {
    const OfdmDims dims(4, 3);
    const auto r = small_covariance(dims, 25.0, 600e-9);
    const auto pattern = some_pilots(dims, {0, 3, 8, 11});
    const auto c = gray_qam(2);
    Rng rng(seed);
    auto g = make_llr_grid(pattern, 2, LlrRole::decoder_prior);
    if (!uniform) {
        for (std::size_t k : pattern.data_indices()) {
            for (std::size_t i = 0; i < 2; ++i) g.at(k, i) = std::normal_distribution<double>(0.0, 2.0)(rng);
        }
    }
    const auto prior = prior_from_llrs(c, g, pattern);
    const double sigma2 = 0.1;

    std::vector<std::size_t> all(12);
    for (std::size_t k = 0; k < 12; ++k) all[k] = k;
    const auto w = oracle::probe_linear(12, all, [&](const Eigen::VectorXcd& e) {
        return to_vec(data_aided_estimate(r, to_grid(dims, e), prior, sigma2).h_hat);
    });

    const oracle::CorrelatedSource src(r);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto reg = oracle::regress(
        samples,
        [&](Eigen::VectorXcd& h, Eigen::VectorXcd& y) {
            h = src.draw(rng);
            y.resize(12);
            for (std::size_t k = 0; k < 12; ++k) {
                cplx x = pattern.values()[k];
                if (!prior.deterministic[k]) {
                    double u = unit(rng);
                    std::size_t label = 0;
                    while (label + 1 < 4 && u >= prior.probs[k * 4 + label]) u -= prior.probs[k * 4 + label++];
                    x = c.point(label);
                }
                y(static_cast<Eigen::Index>(k)) = h(static_cast<Eigen::Index>(k)) * x + complex_normal(rng, sigma2);
            }
        },
        w);
    CHECK(oracle::max_coefficient_error(w, reg.w) < 0.02);
    const auto est = data_aided_estimate(r, ComplexGrid(dims), prior, sigma2, true);
    CHECK(oracle::frobenius_rel(reg.error_cov, *est.err_cov) < 0.05);
    for (std::size_t k = 0; k < 12; ++k) {
        CHECK(est.err_var[k] <= r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real() + 1e-6);
    }
}

}  // namespace

TEST_CASE("data-aided estimate matches the regression oracle") {
    SUBCASE("uniform priors") { check_data_aided_oracle(true, 200'000, 9); }
    SUBCASE("mixed priors") { check_data_aided_oracle(false, 200'000, 10); }
}

TEST_CASE("demapper and decoder share the LLR sign") {
    const auto code = toy_tree_code();
    Rng rng(11);
    std::vector<std::uint8_t> info(code.dimension());
    for (auto& b : info) b = rng() & 1U;
    const auto cw = code.encode(info);
    const OfdmDims dims(24, 1);
    const auto pattern = make_pilot_pattern("none", dims);
    const auto c = bpsk();
    ComplexGrid y(dims);
    for (std::size_t j = 0; j < 24; ++j) y[j] = c.point(cw[j]) + complex_normal(rng, 0.05);
    const auto llr = gaussian_demap(c, y, perfect_estimate(ComplexGrid(dims, cplx{1.0, 0.0})), 0.05, pattern);
    const auto r = decode(code, llr.values);
    CHECK(r.hard_bits == cw);
}

TEST_CASE("superimposed pilot removal") {
    const OfdmDims dims(4, 2);
    ResourceGrid<double> a(dims, 0.2);
    const auto alloc = make_sip_allocation(a, 5);
    Rng rng(12);
    ComplexGrid h(dims), xd(dims);
    for (std::size_t k = 0; k < h.size(); ++k) {
        h[k] = complex_normal(rng);
        xd[k] = complex_normal(rng);
    }
    const auto x = sip_combine(xd, alloc);
    ComplexGrid y(dims);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = h[k] * x[k];
    const auto [yd, heff] = sip_strip_pilot(y, h, alloc);
    for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(yd[k] - heff[k] * xd[k]) < 1e-12);
}

TEST_CASE("receiver kinds") {
    CHECK(parse_receiver_kind("iedd") == ReceiverKind::iedd);
    CHECK(to_string(parse_receiver_kind("non_iterative")) == "non_iterative");
    CHECK(to_string(ReceiverKind::perfect_csi) == "perfect_csi");
    CHECK_THROWS_AS(parse_receiver_kind("neural"), ConfigError);
}

namespace {

struct Link {
    OfdmDims dims{8, 14};
    PilotPattern pattern = make_pilot_pattern("1P", dims);
    FramePlan plan = plan_frame(pattern, 1944, 6, kDefaultInterleaverSeed, 3);
    Constellation c = gray_qam(6);
    const LdpcCode& code = ieee80211n_1944_r23();
    Eigen::MatrixXcd r = build_correlation(dims, kRadio, named_pdp("TDL-A"), {2.0, 100e-9}).full();

    std::vector<std::uint8_t> info;
    BlockObservation obs;

    Link(double sigma2, std::uint64_t seed) {
        Rng rng(seed);
        info.resize(code.dimension());
        for (auto& b : info) b = rng() & 1U;
        const auto frames = assemble(plan, {code.encode(info)}, rng);
        obs.sigma2 = sigma2;
        for (const auto& bits : frames) {
            const auto h = draw_channel(dims, kRadio, named_pdp("TDL-A"), {2.0, 100e-9}, rng);
            obs.y.push_back(apply_channel(h, map_bits(c, pattern, bits), NoiseSpec(sigma2), rng));
            obs.h.push_back(h);
            obs.covariance.push_back(&r);
        }
    }

    ReceiverContext context(ReceiverSettings s = {}) const { return {&c, &pattern, &plan, &code, s}; }

    std::size_t errors(const ReceiverOutput& out) const {
        const auto got = code.extract_info(out.codewords.at(0));
        std::size_t e = 0;
        for (std::size_t j = 0; j < info.size(); ++j) e += got[j] != info[j];
        return e;
    }
};

}  // namespace

TEST_CASE("every receiver is error-free at negligible noise") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Link link(1e-9, seed);
        for (auto kind : {ReceiverKind::perfect_csi, ReceiverKind::non_iterative, ReceiverKind::iedd}) {
            const auto out = run_receiver(kind, link.context(), link.obs);
            CHECK(link.errors(out) == 0);
            for (const auto& f : out.channel_llrs) {
                for (std::size_t k : link.pattern.pilot_indices()) {
                    for (std::size_t i = 0; i < 6; ++i) CHECK(f[k * 6 + i] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("single-pass IEDD reproduces the non-iterative receiver") {
    ReceiverSettings s;
    s.outer_iterations = 1;
    s.inner_bp_iterations = 40;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const Link link(0.02, seed);
        const auto a = run_receiver(ReceiverKind::non_iterative, link.context(s), link.obs);
        const auto b = run_receiver(ReceiverKind::iedd, link.context(s), link.obs);
        CHECK(b.outer_iterations_used == 1);
        CHECK(a.codewords == b.codewords);
        for (std::size_t f = 0; f < a.channel_llrs.size(); ++f) {
            for (std::size_t j = 0; j < a.channel_llrs[f].size(); ++j) {
                REQUIRE(std::abs(a.channel_llrs[f][j] - b.channel_llrs[f][j]) < 1e-5);
            }
        }
    }
}

TEST_CASE("IEDD stops once every codeword converges") {
    const Link link(1e-6, 3);
    const auto out = run_receiver(ReceiverKind::iedd, link.context(), link.obs);
    CHECK(out.outer_iterations_used == 1);
    ReceiverSettings s;
    s.stop_on_convergence = false;
    CHECK(run_receiver(ReceiverKind::iedd, link.context(s), link.obs).outer_iterations_used == 4);
}

TEST_CASE("receiver input checks") {
    Link link(0.1, 1);
    CHECK_THROWS_AS(run_receiver(ReceiverKind::perfect_csi, ReceiverContext{}, link.obs), Error);
    ReceiverSettings s;
    s.outer_iterations = 0;
    CHECK_THROWS_AS(run_receiver(ReceiverKind::iedd, link.context(s), link.obs), ConfigError);
}
