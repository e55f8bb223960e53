#include "cdtree/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace cdtree {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string RuleCondition::render() const {
    if (binary) {
        return feature_name + (relation == Relation::LessEqual ? " = 0" : " = 1");
    }
    return feature_name + (relation == Relation::LessEqual ? " <= " : " > ") + shortest(threshold);
}

bool RuleCondition::holds(std::span<const double> x) const {
    const double v = x[feature];
    return relation == Relation::LessEqual ? v <= threshold : v > threshold;
}

std::string LeafRule::render() const {
    std::string out;
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        if (i > 0) out += " AND ";
        out += conditions[i].render();
    }
    if (conditions.empty()) out = "(all)";
    out += " -> leaf(n=" + std::to_string(n) + ", h=" + std::to_string(h) + ")";
    return out;
}

bool LeafRule::matches(std::span<const double> x) const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [&](const RuleCondition& c) { return c.holds(x); });
}

NodeId route(const CdTree& tree, std::span<const double> x) {
    const Schema& schema = tree.schema();
    if (x.size() != schema.m()) {
        throw DataError("feature vector has " + std::to_string(x.size()) + " values, expected " +
                        std::to_string(schema.m()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!std::isfinite(x[j])) {
            throw DataError("non-finite value for feature '" + schema.column(j).name + "'");
        }
        if (schema.column(j).kind == ColumnKind::Binary && x[j] != 0.0 && x[j] != 1.0) {
            throw DataError("binary feature '" + schema.column(j).name + "' must be 0 or 1");
        }
    }
    NodeId id = CdTree::root();
    while (!tree.node(id).is_leaf()) {
        const auto& node = tree.node(id);
        id = node.split->goes_left(x[node.split->feature]) ? node.left : node.right;
    }
    return id;
}

double log_density(const CdTree& tree, std::span<const double> x, double y) {
    const auto& hist = tree.node(route(tree, x)).hist;
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (hist.n == 0 || !hist.bounds.contains(y)) return kNegInf;
    const auto count = hist.counts[hist.bin_of(y)];
    if (count == 0) return kNegInf;
    return std::log(static_cast<double>(count) /
                    (static_cast<double>(hist.n) * hist.bin_width()));
}

std::vector<std::pair<double, double>> density_grid(const CdTree& tree, std::span<const double> x,
                                                    std::size_t points) {
    if (points < 2) throw DataError("density grid needs at least 2 points");
    const auto& hist = tree.node(route(tree, x)).hist;
    const Bounds& b = hist.bounds;
    auto density_at = [&](double y) {
        if (hist.n == 0) return 0.0;
        return static_cast<double>(hist.counts[hist.bin_of(y)]) /
               (static_cast<double>(hist.n) * hist.bin_width());
    };
    std::vector<std::pair<double, double>> out;
    out.reserve(points);
    if (points == hist.h) {
        const double w = hist.bin_width();
        for (std::size_t j = 0; j < hist.h; ++j) {
            const double mid = b.lower + (static_cast<double>(j) + 0.5) * w;
            out.emplace_back(mid, density_at(mid));
        }
        return out;
    }
    const double step = b.width() / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double y = i + 1 == points ? b.upper : b.lower + static_cast<double>(i) * step;
        out.emplace_back(y, density_at(y));
    }
    return out;
}

std::vector<LeafRule> leaf_rules(const CdTree& tree) {
    const Schema& schema = tree.schema();
    // Tightest bounds per feature along the current path.
    struct Interval {
        std::optional<double> upper;  // x <= upper
        std::optional<double> lower;  // x > lower
    };
    std::vector<LeafRule> out;

    struct Frame {
        NodeId id;
        std::map<std::size_t, Interval> path;
    };
    std::vector<Frame> stack{{CdTree::root(), {}}};
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const auto& node = tree.node(f.id);
        if (node.is_leaf()) {
            LeafRule rule;
            rule.leaf = f.id;
            rule.n = node.hist.n;
            rule.h = node.hist.h;
            for (const auto& [j, iv] : f.path) {
                const bool binary = schema.column(j).kind == ColumnKind::Binary;
                if (iv.upper) {
                    rule.conditions.push_back(
                        {j, schema.column(j).name, Relation::LessEqual, *iv.upper, binary});
                }
                if (iv.lower) {
                    rule.conditions.push_back(
                        {j, schema.column(j).name, Relation::Greater, *iv.lower, binary});
                }
            }
            out.push_back(std::move(rule));
            continue;
        }
        const auto& split = *node.split;
        const double s = split.threshold();
        Frame right{node.right, f.path};
        auto& r = right.path[split.feature];
        r.lower = r.lower ? std::max(*r.lower, s) : s;
        Frame left{node.left, std::move(f.path)};
        auto& l = left.path[split.feature];
        l.upper = l.upper ? std::min(*l.upper, s) : s;
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    return out;
}

}  // namespace cdtree
