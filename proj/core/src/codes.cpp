#include "cdtree/codes.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include "cdtree/core.hpp"

namespace cdtree {

namespace {

double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -INFINITY) return a;
    return a + std::log1p(std::exp(b - a));
}

// ln R(n, 2) = ln sum_a binom(n, a) (a/n)^a ((n-a)/n)^(n-a), with 0^0 = 1.
double ln_binary_regret(std::uint64_t n) {
    const double nd = static_cast<double>(n);
    const double ln_n = std::log(nd);
    const double lg_n1 = std::lgamma(nd + 1.0);
    std::vector<double> terms(n + 1);
    double peak = -INFINITY;
    for (std::uint64_t a = 0; a <= n; ++a) {
        const double ad = static_cast<double>(a);
        const double bd = nd - ad;
        double t = lg_n1 - std::lgamma(ad + 1.0) - std::lgamma(bd + 1.0);
        if (a > 0) t += ad * (std::log(ad) - ln_n);
        if (a < n) t += bd * (std::log(bd) - ln_n);
        terms[a] = t;
        peak = std::max(peak, t);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - peak);
    return peak + std::log(sum);
}

}  // namespace

double rissanen_code_length(std::uint64_t n) {
    if (n < 1) throw DataError("rissanen_code_length needs n >= 1");
    double bits = std::log2(kRissanenConstant);
    for (double t = std::log2(static_cast<double>(n)); t > 0.0; t = std::log2(t)) {
        bits += t;
    }
    return bits;
}

double log2_catalan(std::uint64_t k) {
    // C_k = prod_{i=2..k} (k + i) / i
    double bits = 0.0;
    for (std::uint64_t i = 2; i <= k; ++i) {
        bits += std::log2(static_cast<double>(k + i)) - std::log2(static_cast<double>(i));
    }
    return bits;
}

double structure_code_bits(std::uint64_t leaves) {
    if (leaves < 1) throw DataError("a tree has at least one leaf");
    return rissanen_code_length(leaves) + log2_catalan(leaves - 1);
}

double RegretCache::log2_regret(std::uint64_t n, std::uint64_t k) {
    if (k < 1) throw DataError("regret needs k >= 1");
    if (n == 0 || k == 1) return 0.0;
    {
        std::shared_lock lock(mutex_);
        if (auto it = memo_.find(n); it != memo_.end() && it->second.size() >= k) {
            return it->second[k - 1] / std::numbers::ln2;
        }
    }
    std::unique_lock lock(mutex_);
    auto& row = memo_[n];
    if (row.empty()) {
        row.push_back(0.0);
        row.push_back(ln_binary_regret(n));
    }
    const double nd = static_cast<double>(n);
    while (row.size() < k) {
        const std::size_t kk = row.size() + 1;  // category count being added
        const double prev = row[kk - 2];
        const double prev2 = row[kk - 3];
        row.push_back(log_add_exp(prev, std::log(nd / static_cast<double>(kk - 2)) + prev2));
    }
    return row[k - 1] / std::numbers::ln2;
}

std::size_t RegretCache::rows() const {
    std::shared_lock lock(mutex_);
    return memo_.size();
}

double log_multinomial_regret(std::uint64_t n, std::uint64_t k, RegretCache& cache) {
    return cache.log2_regret(n, k);
}

}  // namespace cdtree
