#pragma once

// Small grids and pilot layouts shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ofdmlink/grid.hpp"
#include "ofdmlink/rng.hpp"

namespace fixture {

using namespace ofdmlink;

inline PilotPattern all_pilots(const OfdmDims& dims, std::uint64_t seed) {
    ComplexGrid values(dims);
    SplitMix64 gen(seed);
    const double a = std::sqrt(0.5);
    for (std::size_t k = 0; k < values.size(); ++k) {
        const auto b = gen.next();
        values[k] = {(b & 1U) ? -a : a, (b & 2U) ? -a : a};
    }
    return PilotPattern("all", dims, std::vector<std::uint8_t>(dims.size(), 1), values, seed);
}

/// Pilots at the given flat indices, QPSK values.
inline PilotPattern some_pilots(const OfdmDims& dims, const std::vector<std::size_t>& where) {
    std::vector<std::uint8_t> mask(dims.size(), 0);
    ComplexGrid values(dims);
    const double a = std::sqrt(0.5);
    for (std::size_t i = 0; i < where.size(); ++i) {
        mask[where[i]] = 1;
        values[where[i]] = {(i & 1U) ? -a : a, (i & 2U) ? -a : a};
    }
    return PilotPattern("custom", dims, mask, values, 0);
}

inline ComplexGrid to_grid(const OfdmDims& dims, const Eigen::VectorXcd& v) {
    ComplexGrid g(dims);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = v(static_cast<Eigen::Index>(k));
    return g;
}

inline Eigen::VectorXcd to_vec(const ComplexGrid& g) {
    return Eigen::Map<const Eigen::VectorXcd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

}  // namespace fixture
