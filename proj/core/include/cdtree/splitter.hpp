#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cdtree/codes.hpp"
#include "cdtree/core.hpp"
#include "cdtree/histogram.hpp"

namespace cdtree {

// The rows of `frame` covered by one tree node.
struct NodeRows {
    const DataFrame& frame;
    std::span<const std::size_t> rows;

    std::size_t size() const { return rows.size(); }
};

struct SplitProposal {
    SplitCondition condition;
    LeafScore left_score;
    LeafScore right_score;
    std::size_t left_n = 0;
    std::size_t right_n = 0;
    double split_code_bits = 0.0;
    // Change in the full tree score if the split is applied, including the
    // growth of the tree-size and structure codes.
    double delta_bits = 0.0;

    // Bits of the two child leaves plus the split condition.
    double children_bits() const {
        return left_score.total_bits + right_score.total_bits + split_code_bits;
    }
};

// Equal-frequency candidates at granularity d: with Q = c * 2^(d-1), the
// order statistics at ranks ceil(i * n / (Q + 1)), i = 1..Q, deduplicated and
// excluding the maximum. Throws DataError on empty input or d, c < 1.
std::vector<double> candidate_thresholds(std::span<const double> values, std::uint32_t d,
                                         std::uint32_t c);

// log2(m) + L_N(d) + log2(c) + d - 1 for continuous splits, log2(m) + 1 for binary.
double split_code_bits(const SplitCondition& condition, std::size_t m, std::uint32_t c);

// Delta of L_N(K) + log2 Catalan(K - 1) when a tree with K leaves gains one.
double structure_delta_bits(std::size_t leaves);

// Scores both children of x_j <= s with MDL-optimal histograms. Returns
// nullopt when either child has fewer than config.min_leaf rows.
std::optional<std::pair<LeafScore, LeafScore>> evaluate_candidate(
    const NodeRows& node, std::size_t feature, double threshold, const Bounds& bounds,
    const FitConfig& config, RegretCache& cache);

// Best split of the node regardless of whether it pays for itself. The
// proposal's delta_bits assumes `leaf_count` leaves in the current tree.
std::optional<SplitProposal> search_split(const NodeRows& node, const Bounds& bounds,
                                          const FitConfig& config, RegretCache& cache,
                                          const LeafScore& current_leaf,
                                          std::size_t leaf_count = 1);

// As search_split, but returns nullopt unless the split strictly lowers the
// total tree score.
std::optional<SplitProposal> best_split_for_node(const NodeRows& node, const Bounds& bounds,
                                                 const FitConfig& config, RegretCache& cache,
                                                 const LeafScore& current_leaf,
                                                 std::size_t leaf_count = 1);

}  // namespace cdtree
