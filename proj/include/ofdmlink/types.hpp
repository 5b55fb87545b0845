#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ofdmlink/error.hpp"

namespace ofdmlink {

using cplx = std::complex<double>;

/// Frame geometry: n_S subcarriers by n_T OFDM symbols.
struct OfdmDims {
    std::size_t n_subcarriers = 72;
    std::size_t n_symbols = 14;

    OfdmDims() = default;
    OfdmDims(std::size_t subcarriers, std::size_t symbols) : n_subcarriers(subcarriers), n_symbols(symbols) {
        if (subcarriers == 0 || symbols == 0) {
            throw DomainError("OfdmDims: subcarrier and symbol counts must be positive");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_subcarriers * n_symbols; }

    /// Flat resource-element index. Subcarrier index runs fastest (column-major vec).
    [[nodiscard]] std::size_t flat(std::size_t subcarrier, std::size_t symbol) const noexcept {
        return subcarrier + n_subcarriers * symbol;
    }
    [[nodiscard]] std::size_t subcarrier_of(std::size_t flat_index) const noexcept {
        return flat_index % n_subcarriers;
    }
    [[nodiscard]] std::size_t symbol_of(std::size_t flat_index) const noexcept {
        return flat_index / n_subcarriers;
    }

    friend bool operator==(const OfdmDims&, const OfdmDims&) = default;
};

/// n_S x n_T grid of per-RE values stored in vec() order.
template <class T>
class ResourceGrid {
public:
    ResourceGrid() = default;
    explicit ResourceGrid(OfdmDims dims, T fill = T{}) : dims_(dims), data_(dims.size(), fill) {}
    ResourceGrid(OfdmDims dims, std::vector<T> values) : dims_(dims), data_(std::move(values)) {
        if (data_.size() != dims_.size()) {
            throw DimensionError("ResourceGrid: value count does not match dims");
        }
    }

    [[nodiscard]] const OfdmDims& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t subcarrier, std::size_t symbol) { return data_[dims_.flat(subcarrier, symbol)]; }
    const T& operator()(std::size_t subcarrier, std::size_t symbol) const {
        return data_[dims_.flat(subcarrier, symbol)];
    }
    T& operator[](std::size_t flat_index) { return data_[flat_index]; }
    const T& operator[](std::size_t flat_index) const { return data_[flat_index]; }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
    [[nodiscard]] T* data() noexcept { return data_.data(); }
    [[nodiscard]] const T* data() const noexcept { return data_.data(); }

    friend bool operator==(const ResourceGrid&, const ResourceGrid&) = default;

private:
    OfdmDims dims_{};
    std::vector<T> data_;
};

using ComplexGrid = ResourceGrid<cplx>;

template <class A, class B>
void require_same_dims(const ResourceGrid<A>& a, const ResourceGrid<B>& b, const char* what) {
    if (!(a.dims() == b.dims())) {
        throw DimensionError(std::string(what) + ": grid dimensions differ");
    }
}

}  // namespace ofdmlink
