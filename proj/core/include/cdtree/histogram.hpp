#pragma once

#include <cstddef>
#include <span>

#include "cdtree/codes.hpp"
#include "cdtree/core.hpp"

namespace cdtree {

// MDL cost of one leaf histogram, in bits.
struct LeafScore {
    std::size_t h = 1;
    double nll_bits = 0.0;
    double regret_bits = 0.0;
    double bin_code_bits = 0.0;  // L_N(h)
    double total_bits = 0.0;

    friend bool operator==(const LeafScore&, const LeafScore&) = default;
};

// Equal-width maximum-likelihood histogram. The last bin is closed on top.
// Throws DataError if a value lies outside `bounds` or h == 0.
FittedHistogram fit_histogram(std::span<const double> values, const Bounds& bounds, std::size_t h);

// -sum_j counts_j * log2(counts_j / (n * w)); empty bins and n == 0 contribute nothing.
double histogram_nll_bits(const FittedHistogram& hist);

LeafScore leaf_score(std::span<const double> values, const Bounds& bounds, std::size_t h,
                     RegretCache& cache);

// MDL-optimal bin count. Coarse scan over h = 1, g+1, 2g+1, ... until the
// score stops improving at h', then an exhaustive pass over
// [max(1, h' - 2g), h'] with ties going to the smaller h.
LeafScore optimal_histogram(std::span<const double> values, const Bounds& bounds, std::size_t g,
                            RegretCache& cache);

}  // namespace cdtree
