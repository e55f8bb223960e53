#include "cdtree/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace cdtree {

namespace {

constexpr std::uint32_t kMaxGranularity = 60;

// Candidates from already sorted values.
std::vector<double> thresholds_from_sorted(std::span<const double> sorted, std::uint32_t d,
                                           std::uint32_t c) {
    const std::uint64_t n = sorted.size();
    const double top = sorted.back();
    std::vector<double> out;
    const std::uint64_t q = static_cast<std::uint64_t>(c) << (d - 1);
    auto push = [&](double v) {
        if (v < top && (out.empty() || out.back() != v)) out.push_back(v);
    };
    if (q >= n) {
        // Ranks cover every position 1..n.
        for (double v : sorted) push(v);
        return out;
    }
    for (std::uint64_t i = 1; i <= q; ++i) {
        const std::uint64_t rank = (i * n + q) / (q + 1);  // ceil(i n / (q + 1))
        push(sorted[rank - 1]);
    }
    return out;
}

// One column of the node, ordered by feature value.
struct SortedColumn {
    std::vector<double> xs;
    std::vector<double> ys;
};

SortedColumn sort_column(const NodeRows& node, std::size_t feature) {
    std::vector<std::size_t> order(node.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return node.frame.at(node.rows[a], feature) < node.frame.at(node.rows[b], feature);
    });
    SortedColumn col;
    col.xs.reserve(order.size());
    col.ys.reserve(order.size());
    for (std::size_t k : order) {
        col.xs.push_back(node.frame.at(node.rows[k], feature));
        col.ys.push_back(node.frame.target(node.rows[k]));
    }
    return col;
}

struct ChildScores {
    LeafScore left;
    LeafScore right;
    std::size_t left_n = 0;
};

std::optional<ChildScores> score_cut(const SortedColumn& col, double threshold,
                                     const Bounds& bounds, const FitConfig& config,
                                     RegretCache& cache) {
    const auto cut = static_cast<std::size_t>(
        std::upper_bound(col.xs.begin(), col.xs.end(), threshold) - col.xs.begin());
    const std::size_t n = col.xs.size();
    if (cut < config.min_leaf || n - cut < config.min_leaf) return std::nullopt;
    const std::span<const double> ys(col.ys);
    return ChildScores{optimal_histogram(ys.first(cut), bounds, config.g, cache),
                       optimal_histogram(ys.subspan(cut), bounds, config.g, cache), cut};
}

// Orders proposals by cost, then feature index, threshold and granularity.
bool better(const SplitProposal& a, const SplitProposal& b) {
    auto key = [](const SplitProposal& p) {
        std::uint32_t d = 0;
        if (const auto* c = std::get_if<ContinuousSplit>(&p.condition.kind)) d = c->granularity;
        return std::make_tuple(p.children_bits(), p.condition.feature, p.condition.threshold(), d);
    };
    return key(a) < key(b);
}

SplitProposal make_proposal(const SplitCondition& cond, const ChildScores& kids, std::size_t n,
                            std::size_t m, const FitConfig& config) {
    SplitProposal p;
    p.condition = cond;
    p.left_score = kids.left;
    p.right_score = kids.right;
    p.left_n = kids.left_n;
    p.right_n = n - kids.left_n;
    p.split_code_bits = split_code_bits(cond, m, config.c);
    return p;
}

std::optional<SplitProposal> search_binary(const NodeRows& node, std::size_t feature,
                                           const Bounds& bounds, const FitConfig& config,
                                           RegretCache& cache) {
    const SortedColumn col = sort_column(node, feature);
    const auto kids = score_cut(col, 0.5, bounds, config, cache);
    if (!kids) return std::nullopt;
    return make_proposal(SplitCondition{feature, BinarySplit{}}, *kids, node.size(),
                         node.frame.m(), config);
}

std::optional<SplitProposal> search_continuous(const NodeRows& node, std::size_t feature,
                                               const Bounds& bounds, const FitConfig& config,
                                               RegretCache& cache) {
    const SortedColumn col = sort_column(node, feature);
    // Child scores depend only on the threshold, so levels share them.
    std::map<double, std::optional<ChildScores>> seen;
    std::optional<SplitProposal> column_best;
    double previous_level = INFINITY;

    for (std::uint32_t d = 1; d <= kMaxGranularity; ++d) {
        const auto thresholds = thresholds_from_sorted(col.xs, d, config.c);
        std::optional<SplitProposal> level_best;
        for (double s : thresholds) {
            auto it = seen.find(s);
            if (it == seen.end()) {
                it = seen.emplace(s, score_cut(col, s, bounds, config, cache)).first;
            }
            if (!it->second) continue;
            auto p = make_proposal(SplitCondition{feature, ContinuousSplit{s, d}}, *it->second,
                                   node.size(), node.frame.m(), config);
            if (!level_best || better(p, *level_best)) level_best = std::move(p);
        }
        if (!level_best || !(level_best->children_bits() < previous_level)) break;
        previous_level = level_best->children_bits();
        if (!column_best || better(*level_best, *column_best)) column_best = level_best;
    }
    return column_best;
}

}  // namespace

std::vector<double> candidate_thresholds(std::span<const double> values, std::uint32_t d,
                                         std::uint32_t c) {
    if (values.empty()) throw DataError("candidate_thresholds needs at least one value");
    if (d < 1 || c < 1) throw DataError("candidate_thresholds needs d >= 1 and c >= 1");
    if (d > kMaxGranularity) throw DataError("granularity level too large");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return thresholds_from_sorted(sorted, d, c);
}

double split_code_bits(const SplitCondition& condition, std::size_t m, std::uint32_t c) {
    const double name_bits = std::log2(static_cast<double>(m));
    if (const auto* cont = std::get_if<ContinuousSplit>(&condition.kind)) {
        const double d = cont->granularity;
        return name_bits + rissanen_code_length(cont->granularity) +
               std::log2(static_cast<double>(c)) + d - 1.0;
    }
    return name_bits + 1.0;
}

double structure_delta_bits(std::size_t leaves) {
    return structure_code_bits(leaves + 1) - structure_code_bits(leaves);
}

std::optional<std::pair<LeafScore, LeafScore>> evaluate_candidate(
    const NodeRows& node, std::size_t feature, double threshold, const Bounds& bounds,
    const FitConfig& config, RegretCache& cache) {
    std::vector<double> left;
    std::vector<double> right;
    for (std::size_t i : node.rows) {
        (node.frame.at(i, feature) <= threshold ? left : right).push_back(node.frame.target(i));
    }
    if (left.size() < config.min_leaf || right.size() < config.min_leaf) return std::nullopt;
    return std::make_pair(optimal_histogram(left, bounds, config.g, cache),
                          optimal_histogram(right, bounds, config.g, cache));
}

std::optional<SplitProposal> search_split(const NodeRows& node, const Bounds& bounds,
                                          const FitConfig& config, RegretCache& cache,
                                          const LeafScore& current_leaf,
                                          std::size_t leaf_count) {
    std::optional<SplitProposal> best;
    if (node.size() < 2) return best;
    const Schema& schema = node.frame.schema();
    for (std::size_t j = 0; j < schema.m(); ++j) {
        auto p = schema.column(j).kind == ColumnKind::Binary
                     ? search_binary(node, j, bounds, config, cache)
                     : search_continuous(node, j, bounds, config, cache);
        if (p && (!best || better(*p, *best))) best = std::move(p);
    }
    if (best) {
        best->delta_bits =
            best->children_bits() + structure_delta_bits(leaf_count) - current_leaf.total_bits;
    }
    return best;
}

std::optional<SplitProposal> best_split_for_node(const NodeRows& node, const Bounds& bounds,
                                                 const FitConfig& config, RegretCache& cache,
                                                 const LeafScore& current_leaf,
                                                 std::size_t leaf_count) {
    auto best = search_split(node, bounds, config, cache, current_leaf, leaf_count);
    if (best && !(best->delta_bits < 0.0)) best.reset();
    return best;
}

}  // namespace cdtree
