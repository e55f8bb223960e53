#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdtree/core.hpp"

namespace cdtree {

enum class Relation { LessEqual, Greater };

struct RuleCondition {
    std::size_t feature = 0;
    std::string feature_name;
    Relation relation = Relation::LessEqual;
    double threshold = 0.0;
    bool binary = false;

    // "age <= 40.5", "bmi > 30", or "smoker = 0" for binary features.
    std::string render() const;
    bool holds(std::span<const double> x) const;
};

struct LeafRule {
    NodeId leaf = 0;
    std::vector<RuleCondition> conditions;  // ordered by feature index, <= before >
    std::uint64_t n = 0;
    std::size_t h = 1;

    // "cond AND cond -> leaf(n=.., h=..)"; "(all) -> ..." for the root leaf.
    std::string render() const;
    bool matches(std::span<const double> x) const;
};

// Descends from the root taking the left child iff x_j <= s. Throws
// DataError when x does not have m values or a binary feature is not 0/1.
NodeId route(const CdTree& tree, std::span<const double> x);

// ln f(y | x) under the routed leaf's maximum-likelihood histogram; -inf for y
// outside the bounds, an empty bin, or an empty leaf.
double log_density(const CdTree& tree, std::span<const double> x, double y);

// Density of the routed leaf at `points` locations: the bin midpoints when
// points equals h, otherwise an even grid over [lower, upper] including both
// ends. Throws DataError if points < 2.
std::vector<std::pair<double, double>> density_grid(const CdTree& tree, std::span<const double> x,
                                                    std::size_t points);

// One rule per leaf (depth-first order) with redundant conditions removed.
std::vector<LeafRule> leaf_rules(const CdTree& tree);

}  // namespace cdtree
