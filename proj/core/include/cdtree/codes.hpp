#pragma once

#include <cstdint>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

namespace cdtree {

// Normalizing constant of Rissanen's universal prior for the integers.
inline constexpr double kRissanenConstant = 2.865064;

// L_N(n) = log2(c) + log2(n) + log2(log2(n)) + ..., summing only the
// strictly positive iterated-log terms. Throws DataError if n < 1.
double rissanen_code_length(std::uint64_t n);

// log2 of the k-th Catalan number, the number of full binary trees with k+1 leaves.
double log2_catalan(std::uint64_t k);

// Bits for the tree size and shape: L_N(K) + log2 Catalan(K - 1). Needs K >= 1.
double structure_code_bits(std::uint64_t leaves);

// Memo for log2 R(n, k), the multinomial NML normalizer. Safe to share
// between threads; each row grows on demand.
class RegretCache {
public:
    // log2 R(n, k); 0 for n == 0 or k == 1. Throws DataError if k < 1.
    double log2_regret(std::uint64_t n, std::uint64_t k);

    std::size_t rows() const;

private:
    mutable std::shared_mutex mutex_;
    // memo_[n][k - 1] holds ln R(n, k).
    std::unordered_map<std::uint64_t, std::vector<double>> memo_;
};

// log2 R(n, k) through `cache`: the binary case is an exact log-sum-exp over
// the sample split, larger k follow R(n,k) = R(n,k-1) + n/(k-2) R(n,k-2).
double log_multinomial_regret(std::uint64_t n, std::uint64_t k, RegretCache& cache);

// Brute-force log2 R(n, k) by enumerating every composition of n into k
// parts. Only for n <= 12 and k <= 6; throws DataError otherwise.
double regret_oracle(std::uint64_t n, std::uint64_t k);

}  // namespace cdtree
