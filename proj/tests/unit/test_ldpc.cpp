#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ofdmlink/ldpc.hpp"
#include "ofdmlink/rng.hpp"
#include "support/oracles.hpp"

using namespace ofdmlink;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> b(n);
    for (auto& v : b) v = coin(rng) ? 1 : 0;
    return b;
}

/// y = (1 - 2b) + n over BI-AWGN, returned as ln P1/P0 = -2y/sigma2.
std::vector<double> bpsk_llrs(const std::vector<std::uint8_t>& cw, double sigma2, Rng& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(sigma2));
    std::vector<double> l(cw.size());
    for (std::size_t j = 0; j < cw.size(); ++j) l[j] = -2.0 * ((1.0 - 2.0 * cw[j]) + nd(rng)) / sigma2;
    return l;
}

}  // namespace

TEST_CASE("802.11n code dimensions") {
    const auto& code = ieee80211n_1944_r23();
    CHECK(code.length() == 1944);
    CHECK(code.dimension() == 1296);
    CHECK(code.check_count() == 648);
    CHECK(code.rate() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("encoder is linear and produces codewords") {
    const auto& code = ieee80211n_1944_r23();
    Rng rng(1);
    const auto zero = code.encode(std::vector<std::uint8_t>(1296, 0));
    CHECK(std::all_of(zero.begin(), zero.end(), [](std::uint8_t b) { return b == 0; }));
    for (int t = 0; t < 1000; ++t) {
        const auto a = random_bits(1296, rng);
        const auto b = random_bits(1296, rng);
        const auto ca = code.encode(a);
        const auto cb = code.encode(b);
        REQUIRE(code.is_codeword(ca));
        std::vector<std::uint8_t> sum(1944);
        for (std::size_t j = 0; j < 1944; ++j) sum[j] = ca[j] ^ cb[j];
        REQUIRE(code.is_codeword(sum));
        REQUIRE(code.extract_info(ca) == a);
    }
    CHECK_THROWS_AS(static_cast<void>(code.encode(std::vector<std::uint8_t>(5))), DimensionError);
}

TEST_CASE("noiseless all-zero codeword decodes at once") {
    const auto& code = ieee80211n_1944_r23();
    // ln P1/P0 = -30: confident zeros.
    const auto r = decode(code, std::vector<double>(1944, -kLlrClamp));
    CHECK(r.converged);
    CHECK(r.iterations_used <= 1);
    CHECK(std::all_of(r.hard_bits.begin(), r.hard_bits.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("one flipped LLR is corrected") {
    const auto& code = ieee80211n_1944_r23();
    Rng rng(2);
    const auto cw = code.encode(random_bits(1296, rng));
    std::vector<double> llr(1944);
    for (std::size_t j = 0; j < 1944; ++j) llr[j] = cw[j] ? 8.0 : -8.0;
    llr[700] = -llr[700];
    const auto r = decode(code, llr);
    CHECK(r.converged);
    CHECK(r.hard_bits == cw);
    CHECK(r.output_llrs[700] * llr[700] < 0);
}

TEST_CASE("decoding over BI-AWGN at 4 dB") {
    const auto& code = ieee80211n_1944_r23();
    Rng rng(3);
    const double sigma2 = 1.0 / (2.0 * code.rate() * std::pow(10.0, 0.4));
    std::size_t errors = 0;
    for (int t = 0; t < 50; ++t) {
        const auto info = random_bits(1296, rng);
        const auto cw = code.encode(info);
        const auto r = decode(code, bpsk_llrs(cw, sigma2, rng));
        const auto out = code.extract_info(r.hard_bits);
        for (std::size_t j = 0; j < info.size(); ++j) errors += out[j] != info[j];
    }
    CHECK(errors == 0);
}

TEST_CASE("BP on the tree code gives exact marginals") {
    const auto code = toy_tree_code();
    CHECK(code.length() == 24);
    CHECK(code.dimension() == 12);
    Rng rng(4);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> llr(24), prior(24, 0.0);
        for (auto& v : llr) v = nd(rng);
        if (trial % 2 == 1) {
            for (auto& v : prior) v = nd(rng);
        }
        std::vector<double> total(24);
        for (std::size_t j = 0; j < 24; ++j) total[j] = llr[j] + prior[j];
        const auto exact = oracle::exact_posteriors(code, total);
        const auto r = decode(code, llr, DecodeOptions{60, false}, prior);
        CHECK(r.iterations_used == 60);
        for (std::size_t j = 0; j < 24; ++j) {
            REQUIRE(std::abs(r.output_llrs[j] - exact[j]) < 1e-9);
            const double extrinsic = r.output_llrs[j] - llr[j] - prior[j];
            REQUIRE(std::isfinite(extrinsic));
            REQUIRE(std::abs(extrinsic - (exact[j] - total[j])) < 1e-9);
        }
    }
}

TEST_CASE("decoder input validation and clamping") {
    const auto code = toy_tree_code();
    CHECK_THROWS_AS(decode(code, std::vector<double>(5)), DimensionError);
    CHECK_THROWS_AS(decode(code, std::vector<double>(24), {}, std::vector<double>(3)), DimensionError);
    std::vector<double> llr(24, -1e6);
    llr[3] = std::nan("");
    const auto r = decode(code, llr);
    for (double v : r.output_llrs) CHECK(std::isfinite(v));
    CHECK(r.converged);
}

TEST_CASE("parity-check construction errors") {
    CHECK_THROWS_AS(LdpcCode(4, {}), DomainError);
    CHECK_THROWS_AS(LdpcCode(4, {{0, 0, 1}}), DomainError);
    CHECK_THROWS_AS(LdpcCode(4, {{0, 4}}), DomainError);
    CHECK_THROWS_AS(LdpcCode::from_base_matrix({{0, 5}}, 4), FormatError);
    CHECK_THROWS_AS(LdpcCode::from_base_matrix({{0, 1}, {0}}, 4), FormatError);
}

TEST_CASE("quasi-cyclic expansion") {
    const auto code = LdpcCode::from_base_matrix({{1, -1, 0}, {0, 2, -1}}, 3);
    CHECK(code.length() == 9);
    CHECK(code.check_count() == 6);
    CHECK(code.dimension() == 3);
    // Block row 0, shift 1: row i connects column (i + 1) mod 3.
    CHECK(code.checks()[0] == std::vector<std::uint32_t>{1, 6});
    CHECK(code.checks()[2] == std::vector<std::uint32_t>{0, 8});
    CHECK(code.checks()[3] == std::vector<std::uint32_t>{0, 5});
}

TEST_CASE("alist round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "ofdmlink_code.alist";
    const auto& code = ieee80211n_1944_r23();
    code.save_alist(path);
    const auto back = LdpcCode::from_alist(path);
    CHECK(back.checks() == code.checks());
    CHECK(back.dimension() == 1296);
    {
        std::ofstream out(path);
        out << "4 2\n2 2\n";
    }
    CHECK_THROWS_AS(LdpcCode::from_alist(path), FormatError);
    std::filesystem::remove(path);
}
