#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <filesystem>
#include <fstream>

#include "ofdmlink/modem.hpp"

using namespace ofdmlink;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ofdmlink_modem_" + name);
}

double min_distance(const Constellation& c) {
    double d = 1e9;
    for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = a + 1; b < c.size(); ++b) d = std::min(d, std::abs(c.point(a) - c.point(b)));
    }
    return d;
}

}  // namespace

TEST_CASE("QPSK points and labels") {
    const auto c = gray_qam(2);
    const double a = 1.0 / std::sqrt(2.0);
    for (const auto& p : c.points()) {
        CHECK(std::abs(std::abs(p.real()) - a) < 1e-15);
        CHECK(std::abs(std::abs(p.imag()) - a) < 1e-15);
    }
    // First bit picks the in-phase sign, second the quadrature sign.
    CHECK(c.point(0b00).real() == doctest::Approx(-c.point(0b10).real()));
    CHECK(c.point(0b00).imag() == doctest::Approx(-c.point(0b01).imag()));
}

TEST_CASE("QAM is centered with unit power") {
    for (std::size_t m : {2, 4, 6}) {
        const auto c = gray_qam(m);
        CHECK(c.size() == (std::size_t{1} << m));
        CHECK(std::abs(c.mean()) < 1e-12);
        CHECK(std::abs(c.energy() - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(gray_qam(3), DomainError);
    CHECK_THROWS_AS(gray_qam(8), DomainError);
}

TEST_CASE("nearest neighbours differ in one label bit") {
    for (std::size_t m : {2, 4, 6}) {
        const auto c = gray_qam(m);
        const double d = min_distance(c);
        int pairs = 0;
        for (std::size_t a = 0; a < c.size(); ++a) {
            for (std::size_t b = a + 1; b < c.size(); ++b) {
                if (std::abs(c.point(a) - c.point(b)) < d * (1 + 1e-9)) {
                    CHECK(std::popcount(a ^ b) == 1);
                    ++pairs;
                }
            }
        }
        const int side = 1 << (m / 2);
        CHECK(pairs == 2 * side * (side - 1));
    }
}

TEST_CASE("normalize_center is idempotent and affine invariant") {
    const auto q = gray_qam(4);
    const auto same = normalize_center(q.points());
    for (std::size_t u = 0; u < q.size(); ++u) CHECK(std::abs(same.point(u) - q.point(u)) < 1e-12);

    std::vector<cplx> moved;
    for (const auto& p : q.points()) moved.push_back(7.0 * p + cplx{0.3, -2.0});
    const auto back = normalize_center(moved);
    for (std::size_t u = 0; u < q.size(); ++u) CHECK(std::abs(back.point(u) - q.point(u)) < 1e-12);

    Rng rng(2);
    std::vector<cplx> raw(64);
    for (auto& p : raw) p = complex_normal(rng) + cplx{1.0, 1.0};
    const auto n = normalize_center(raw);
    CHECK(std::abs(n.mean()) < 1e-9);
    CHECK(std::abs(n.energy() - 1.0) < 1e-9);
    const auto n2 = normalize_center(n.points());
    for (std::size_t u = 0; u < n.size(); ++u) CHECK(std::abs(n2.point(u) - n.point(u)) < 1e-12);

    CHECK_THROWS_AS(normalize_center(std::vector<cplx>(4, cplx{1.0, 2.0})), DomainError);
    CHECK_THROWS_AS(normalize_center(std::vector<cplx>(3, cplx{})), DimensionError);
}

TEST_CASE("map_bits and hard_demap") {
    const OfdmDims dims(72, 14);
    const auto pattern = make_pilot_pattern("1P", dims);
    const auto c = gray_qam(6);

    SUBCASE("all-zero bits") {
        const auto x = map_bits(c, pattern, BitFrame(dims.size() * 6, 0));
        for (std::size_t k : pattern.data_indices()) CHECK(x[k] == c.point(0));
        for (std::size_t k : pattern.pilot_indices()) CHECK(x[k] == pattern.values()[k]);
    }
    SUBCASE("label round-trip") {
        Rng rng(4);
        std::uniform_int_distribution<std::size_t> pick(0, 63);
        std::vector<std::size_t> labels(10'000);
        std::vector<cplx> sym, noisy;
        for (auto& l : labels) {
            l = pick(rng);
            sym.push_back(c.point(l));
            noisy.push_back(c.point(l) + complex_normal(rng, 2e-12));
        }
        CHECK(hard_demap(c, sym) == labels);
        CHECK(hard_demap(c, noisy) == labels);
    }
    SUBCASE("label bits are MSB first") {
        const std::vector<std::uint8_t> bits{1, 0, 0, 0, 0, 1};
        CHECK(bits_to_label(bits) == 0b100001);
        CHECK(c.bit(0b100001, 0) == 1);
        CHECK(c.bit(0b100001, 1) == 0);
        CHECK(c.bit(0b100001, 5) == 1);
    }
    CHECK_THROWS_AS(map_bits(c, pattern, BitFrame(dims.size() * 4, 0)), DimensionError);
}

TEST_CASE("sip_combine") {
    const OfdmDims dims(4, 2);
    const ComplexGrid ones(dims, cplx{1.0, 0.0});
    const auto pilot = sip_pilot_sequence(dims, 3);

    const auto zero = make_sip_allocation(ResourceGrid<double>(dims, 0.0), 3);
    CHECK(sip_combine(ones, zero) == ones);

    const auto full = make_sip_allocation(ResourceGrid<double>(dims, 1.0), 3);
    const auto x = sip_combine(ones, full);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[k] == cplx{pilot[k], 0.0});

    const auto quarter = make_sip_allocation(ResourceGrid<double>(dims, 0.25), 3);
    const auto xq = sip_combine(ones, quarter);
    for (std::size_t k = 0; k < xq.size(); ++k) {
        if (pilot[k] < 0) CHECK(xq[k].real() == doctest::Approx(std::sqrt(0.75) - std::sqrt(0.25)));
    }
    CHECK_THROWS_AS(make_sip_allocation(ResourceGrid<double>(dims, 1.5), 3), DomainError);
}

TEST_CASE("SIP pilot sequence is balanced") {
    const OfdmDims dims(72, 14);
    const auto p = sip_pilot_sequence(dims, 8);
    double sum = 0.0;
    for (double v : p.values()) {
        CHECK(std::abs(v) == 1.0);
        sum += v;
    }
    CHECK(std::abs(sum) / static_cast<double>(dims.size()) <= 3.0 / std::sqrt(static_cast<double>(dims.size())));
    CHECK(sip_pilot_sequence(dims, 8) == p);
}

TEST_CASE("SIP conserves per-RE energy") {
    const OfdmDims dims(6, 2);
    ResourceGrid<double> a(dims);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.05 * static_cast<double>(k);
    const auto alloc = make_sip_allocation(a, 11);
    const auto c = gray_qam(6);
    Rng rng(12);
    std::uniform_int_distribution<std::size_t> pick(0, 63);
    std::vector<double> energy(dims.size(), 0.0);
    const int draws = 100'000;
    for (int d = 0; d < draws; ++d) {
        ComplexGrid xd(dims);
        for (std::size_t k = 0; k < xd.size(); ++k) xd[k] = c.point(pick(rng));
        const auto x = sip_combine(xd, alloc);
        for (std::size_t k = 0; k < x.size(); ++k) energy[k] += std::norm(x[k]);
    }
    for (double e : energy) CHECK(std::abs(e / draws - 1.0) < 0.01);
}

TEST_CASE("constellation files") {
    const auto path = temp_file("qpsk.csv");
    save_constellation(gray_qam(2), path);
    const auto back = load_constellation(path, 2);
    CHECK(back.points() == gray_qam(2).points());

    {
        std::ofstream out(path);
        out << "label,re,im\n0,1.1,0\n1,-0.9,0\n";
    }
    CHECK_THROWS_AS(load_constellation(path), FormatError);

    {
        std::ofstream out(path);
        out << "label,re,im\n";
        const auto q = gray_qam(6);
        for (std::size_t u = 0; u < 63; ++u) out << u << ',' << q.point(u).real() << ',' << q.point(u).imag() << '\n';
    }
    CHECK_THROWS_AS(load_constellation(path, 6), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("SIP allocation files") {
    const OfdmDims dims(4, 3);
    ResourceGrid<double> a(dims);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = 0.01 * static_cast<double>(k);
    const auto alloc = make_sip_allocation(a, 77);
    const auto path = temp_file("sip.csv");
    save_sip_allocation(alloc, path);
    const auto back = load_sip_allocation(path, dims);
    CHECK(back.seed == 77);
    CHECK(back.fraction == alloc.fraction);
    CHECK(back.pilot == alloc.pilot);
    CHECK_THROWS_AS(load_sip_allocation(path, OfdmDims(5, 3)), FormatError);
    std::filesystem::remove(path);
}
