#include <cmath>
#include <vector>

#include "cdtree/codes.hpp"
#include "cdtree/core.hpp"

namespace cdtree {

namespace {

double factorial(std::uint64_t n) {
    double f = 1.0;
    for (std::uint64_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

// Sums multinomial(n; parts) * prod (part/n)^part over every composition,
// filling parts[slot..] recursively.
double enumerate(std::vector<std::uint64_t>& parts, std::size_t slot, std::uint64_t left,
                 std::uint64_t n) {
    if (slot + 1 == parts.size()) {
        parts[slot] = left;
        double term = factorial(n);
        for (std::uint64_t p : parts) {
            term /= factorial(p);
            if (p > 0) term *= std::pow(static_cast<double>(p) / static_cast<double>(n),
                                        static_cast<double>(p));
        }
        return term;
    }
    double sum = 0.0;
    for (std::uint64_t p = 0; p <= left; ++p) {
        parts[slot] = p;
        sum += enumerate(parts, slot + 1, left - p, n);
    }
    return sum;
}

}  // namespace

double regret_oracle(std::uint64_t n, std::uint64_t k) {
    if (n > 12 || k > 6 || k < 1) {
        throw DataError("regret_oracle only supports n <= 12 and 1 <= k <= 6");
    }
    if (n == 0) return 0.0;
    std::vector<std::uint64_t> parts(k, 0);
    return std::log2(enumerate(parts, 0, n, n));
}

}  // namespace cdtree
