#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace phishguard {

/// Index/value pairs over a fixed-dimension feature space.
/// Indices are strictly increasing and below `dim`; values are finite.
/// Exact zeros are not stored.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::size_t dim = 0;

    std::size_t nnz() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }

    /// Throws ArgumentError when an invariant does not hold.
    void validate() const;

    double dot(std::span<const double> dense) const noexcept
    {
        double sum = 0.0;
        for (std::size_t k = 0; k < indices.size(); ++k) sum += values[k] * dense[indices[k]];
        return sum;
    }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

}  // namespace phishguard
