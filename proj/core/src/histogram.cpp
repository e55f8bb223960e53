#include "cdtree/histogram.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace cdtree {

namespace {

void check_inside(std::span<const double> values, const Bounds& bounds) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!bounds.contains(values[i])) {
            std::ostringstream os;
            os << "value " << values[i] << " at position " << i << " lies outside ["
               << bounds.lower << ", " << bounds.upper << "]";
            throw DataError(os.str());
        }
    }
}

std::size_t bin_index(double y, double lower, double width, std::size_t h) {
    const double pos = (y - lower) / width;
    if (pos <= 0.0) return 0;
    const auto idx = static_cast<std::size_t>(std::floor(pos));
    return idx >= h ? h - 1 : idx;
}

double nll_bits_from_counts(std::span<const std::uint64_t> counts, std::uint64_t n,
                            double width) {
    if (n == 0) return 0.0;
    const double scale = static_cast<double>(n) * width;
    double bits = 0.0;
    for (std::uint64_t c : counts) {
        if (c == 0) continue;
        const double cd = static_cast<double>(c);
        bits -= cd * std::log2(cd / scale);
    }
    return bits;
}

// Scores one bin count on pre-checked values, reusing `counts` as scratch.
LeafScore score_unchecked(std::span<const double> values, const Bounds& bounds, std::size_t h,
                          RegretCache& cache, std::vector<std::uint64_t>& counts) {
    counts.assign(h, 0);
    const double width = bounds.width() / static_cast<double>(h);
    for (double y : values) ++counts[bin_index(y, bounds.lower, width, h)];

    LeafScore s;
    s.h = h;
    s.nll_bits = nll_bits_from_counts(counts, values.size(), width);
    s.regret_bits = log_multinomial_regret(values.size(), h, cache);
    s.bin_code_bits = rissanen_code_length(h);
    s.total_bits = s.nll_bits + s.regret_bits + s.bin_code_bits;
    return s;
}

}  // namespace

FittedHistogram fit_histogram(std::span<const double> values, const Bounds& bounds,
                              std::size_t h) {
    if (h < 1) throw DataError("histogram needs h >= 1");
    check_inside(values, bounds);
    FittedHistogram hist;
    hist.bounds = bounds;
    hist.h = h;
    hist.counts.assign(h, 0);
    hist.n = values.size();
    const double width = hist.bin_width();
    for (double y : values) ++hist.counts[bin_index(y, bounds.lower, width, h)];
    return hist;
}

double histogram_nll_bits(const FittedHistogram& hist) {
    return nll_bits_from_counts(hist.counts, hist.n, hist.bin_width());
}

LeafScore leaf_score(std::span<const double> values, const Bounds& bounds, std::size_t h,
                     RegretCache& cache) {
    if (h < 1) throw DataError("histogram needs h >= 1");
    check_inside(values, bounds);
    std::vector<std::uint64_t> counts;
    return score_unchecked(values, bounds, h, cache, counts);
}

LeafScore optimal_histogram(std::span<const double> values, const Bounds& bounds, std::size_t g,
                            RegretCache& cache) {
    if (g < 1) throw DataError("bin search step g must be >= 1");
    check_inside(values, bounds);
    std::vector<std::uint64_t> counts;

    std::size_t probe = 1;
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        const double total = score_unchecked(values, bounds, probe, cache, counts).total_bits;
        if (!(total < best)) break;
        best = total;
        probe += g;
    }

    const std::size_t low = probe > 2 * g ? probe - 2 * g : 1;
    LeafScore winner = score_unchecked(values, bounds, low, cache, counts);
    for (std::size_t h = low + 1; h <= probe; ++h) {
        LeafScore s = score_unchecked(values, bounds, h, cache, counts);
        if (s.total_bits < winner.total_bits) winner = s;
    }
    return winner;
}

}  // namespace cdtree
