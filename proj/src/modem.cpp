#include "ofdmlink/modem.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ofdmlink {

Constellation::Constellation(std::size_t bits_per_symbol, std::vector<cplx> points)
    : m_(bits_per_symbol), points_(std::move(points)) {
    if (m_ == 0 || m_ > 16 || points_.size() != (std::size_t{1} << m_)) {
        throw DimensionError("Constellation: point count must be 2^m");
    }
    for (const auto& p : points_) {
        mean_ += p;
        energy_ += std::norm(p);
    }
    mean_ /= static_cast<double>(points_.size());
    energy_ /= static_cast<double>(points_.size());
}

Constellation gray_qam(std::size_t bits_per_symbol) {
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6) {
        throw DomainError("gray_qam: bits per symbol must be 2, 4 or 6");
    }
    const std::size_t half = bits_per_symbol / 2;
    const std::size_t levels = std::size_t{1} << half;
    // Gray-coded axis value g sits at position gray_to_binary(g).
    std::vector<double> amplitude(levels);
    for (std::size_t g = 0; g < levels; ++g) {
        std::size_t b = g;
        for (std::size_t shift = g >> 1; shift != 0; shift >>= 1) b ^= shift;
        amplitude[g] = 2.0 * static_cast<double>(b) - static_cast<double>(levels - 1);
    }
    const double scale = std::sqrt(2.0 * (static_cast<double>(levels * levels) - 1.0) / 3.0);
    std::vector<cplx> points(std::size_t{1} << bits_per_symbol);
    for (std::size_t u = 0; u < points.size(); ++u) {
        const std::size_t gi = u >> half;
        const std::size_t gq = u & (levels - 1);
        points[u] = cplx{amplitude[gi], amplitude[gq]} / scale;
    }
    return Constellation(bits_per_symbol, std::move(points));
}

Constellation bpsk() { return Constellation(1, {cplx{-1.0, 0.0}, cplx{1.0, 0.0}}); }

Constellation normalize_center(std::span<const cplx> raw_points) {
    const std::size_t count = raw_points.size();
    std::size_t m = 0;
    while ((std::size_t{1} << m) < count) ++m;
    if (count < 2 || (std::size_t{1} << m) != count) {
        throw DimensionError("normalize_center: point count must be a power of two >= 2");
    }
    cplx mean = 0.0;
    for (const auto& p : raw_points) mean += p;
    mean /= static_cast<double>(count);
    // Second moment about the mean, accumulated on centered values.
    double var = 0.0;
    for (const auto& p : raw_points) var += std::norm(p - mean);
    var /= static_cast<double>(count);
    if (!(var > 0.0) || !std::isfinite(var)) throw DomainError("normalize_center: degenerate constellation");
    const double inv_std = 1.0 / std::sqrt(var);
    std::vector<cplx> out(count);
    for (std::size_t u = 0; u < count; ++u) out[u] = (raw_points[u] - mean) * inv_std;
    return Constellation(m, std::move(out));
}

void require_centered(const Constellation& c, double tol) {
    if (std::abs(c.mean()) > tol) {
        throw DomainError("constellation is not centered (|mean| = " + std::to_string(std::abs(c.mean())) + ")");
    }
    if (std::abs(c.energy() - 1.0) > tol) {
        throw DomainError("constellation does not have unit power (power = " + std::to_string(c.energy()) + ")");
    }
}

std::size_t bits_to_label(std::span<const std::uint8_t> bits) {
    std::size_t u = 0;
    for (std::uint8_t b : bits) u = (u << 1) | (b & 1U);
    return u;
}

ComplexGrid map_bits(const Constellation& c, const PilotPattern& pattern, const BitFrame& bits) {
    const std::size_t m = c.bits_per_symbol();
    const auto& dims = pattern.dims();
    if (bits.size() != dims.size() * m) throw DimensionError("map_bits: bit frame size does not match m");
    ComplexGrid x = pattern.values();
    for (std::size_t re : pattern.data_indices()) {
        x[re] = c.point(bits_to_label(std::span<const std::uint8_t>(bits).subspan(re * m, m)));
    }
    return x;
}

std::vector<std::size_t> hard_demap(const Constellation& c, std::span<const cplx> symbols) {
    std::vector<std::size_t> labels(symbols.size());
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < c.size(); ++u) {
            const double d = std::norm(symbols[k] - c.point(u));
            if (d < best) {
                best = d;
                labels[k] = u;
            }
        }
    }
    return labels;
}

ResourceGrid<double> sip_pilot_sequence(const OfdmDims& dims, std::uint64_t seed) {
    const std::size_t n = dims.size();
    const auto perm = seeded_permutation(n, seed);
    ResourceGrid<double> p(dims);
    for (std::size_t k = 0; k < n; ++k) p[k] = perm[k] < (n + 1) / 2 ? 1.0 : -1.0;
    return p;
}

SipAllocation make_sip_allocation(ResourceGrid<double> fraction, std::uint64_t seed) {
    for (double a : fraction.values()) {
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("SIP allocation outside [0, 1]");
    }
    SipAllocation alloc;
    alloc.pilot = sip_pilot_sequence(fraction.dims(), seed);
    alloc.fraction = std::move(fraction);
    alloc.seed = seed;
    return alloc;
}

ComplexGrid sip_combine(const ComplexGrid& data_symbols, const SipAllocation& alloc) {
    require_same_dims(data_symbols, alloc.fraction, "sip_combine");
    require_same_dims(data_symbols, alloc.pilot, "sip_combine");
    ComplexGrid x(data_symbols.dims());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = alloc.fraction[k];
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("sip_combine: allocation outside [0, 1]");
        x[k] = std::sqrt(1.0 - a) * data_symbols[k] + std::sqrt(a) * alloc.pilot[k];
    }
    return x;
}

void save_constellation(const Constellation& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_constellation: cannot open " + path.string());
    out << "label,re,im\n" << std::setprecision(17);
    for (std::size_t u = 0; u < c.size(); ++u) out << u << ',' << c.point(u).real() << ',' << c.point(u).imag() << '\n';
    if (!out) throw FormatError("save_constellation: write failed for " + path.string());
}

Constellation load_constellation(const std::filesystem::path& path, std::size_t expected_bits, double tol) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_constellation: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("label,re,im", 0) != 0) {
        throw FormatError("load_constellation: missing 'label,re,im' header in " + path.string());
    }
    std::vector<std::pair<std::size_t, cplx>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
            throw FormatError("load_constellation: malformed row '" + line + "'");
        }
        try {
            rows.emplace_back(std::stoul(a), cplx{std::stod(b), std::stod(c)});
        } catch (const std::exception&) {
            throw FormatError("load_constellation: non-numeric row '" + line + "'");
        }
    }
    std::size_t m = 0;
    while ((std::size_t{1} << m) < rows.size()) ++m;
    if (rows.size() < 2 || (std::size_t{1} << m) != rows.size()) {
        throw FormatError("load_constellation: point count " + std::to_string(rows.size()) + " is not a power of two");
    }
    if (expected_bits != 0 && m != expected_bits) {
        throw FormatError("load_constellation: expected " + std::to_string(std::size_t{1} << expected_bits) +
                          " points, found " + std::to_string(rows.size()));
    }
    std::vector<cplx> points(rows.size());
    std::vector<bool> seen(rows.size(), false);
    for (const auto& [label, p] : rows) {
        if (label >= rows.size() || seen[label]) throw FormatError("load_constellation: labels must be a permutation");
        seen[label] = true;
        points[label] = p;
    }
    Constellation c(m, std::move(points));
    try {
        require_centered(c, tol);
    } catch (const DomainError& e) {
        throw FormatError("load_constellation: " + std::string(e.what()));
    }
    return c;
}

void save_sip_allocation(const SipAllocation& alloc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_sip_allocation: cannot open " + path.string());
    const auto& dims = alloc.fraction.dims();
    out << "seed," << alloc.seed << "\ni,k,A\n" << std::setprecision(17);
    for (std::size_t k = 0; k < dims.n_symbols; ++k) {
        for (std::size_t i = 0; i < dims.n_subcarriers; ++i) out << i << ',' << k << ',' << alloc.fraction(i, k) << '\n';
    }
    if (!out) throw FormatError("save_sip_allocation: write failed for " + path.string());
}

SipAllocation load_sip_allocation(const std::filesystem::path& path, const OfdmDims& dims) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_sip_allocation: cannot open " + path.string());
    std::string line;
    std::uint64_t seed = 0;
    if (!std::getline(in, line) || line.rfind("seed,", 0) != 0) {
        throw FormatError("load_sip_allocation: first line must be 'seed,<value>'");
    }
    try {
        seed = std::stoull(line.substr(5));
    } catch (const std::exception&) {
        throw FormatError("load_sip_allocation: bad seed line");
    }
    if (!std::getline(in, line) || line.rfind("i,k,A", 0) != 0) {
        throw FormatError("load_sip_allocation: missing 'i,k,A' header");
    }
    ResourceGrid<double> fraction(dims, -1.0);
    std::size_t count = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
            throw FormatError("load_sip_allocation: malformed row '" + line + "'");
        }
        std::size_t i = 0, k = 0;
        double v = 0.0;
        try {
            i = std::stoul(a);
            k = std::stoul(b);
            v = std::stod(c);
        } catch (const std::exception&) {
            throw FormatError("load_sip_allocation: non-numeric row '" + line + "'");
        }
        if (i >= dims.n_subcarriers || k >= dims.n_symbols) throw FormatError("load_sip_allocation: index out of range");
        if (fraction(i, k) >= 0.0) throw FormatError("load_sip_allocation: duplicate RE");
        if (!(v >= 0.0 && v <= 1.0)) throw FormatError("load_sip_allocation: A outside [0, 1]");
        fraction(i, k) = v;
        ++count;
    }
    if (count != dims.size()) throw FormatError("load_sip_allocation: allocation does not cover every RE");
    return make_sip_allocation(std::move(fraction), seed);
}

}  // namespace ofdmlink
