#include "cdtree/core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace cdtree {

Schema::Schema(std::vector<Column> columns, std::string target_name)
    : columns_(std::move(columns)), target_name_(std::move(target_name)) {
    if (columns_.empty()) {
        throw DataError("schema needs at least one feature column (m >= 1)");
    }
    std::unordered_set<std::string> seen;
    for (const auto& col : columns_) {
        if (!seen.insert(col.name).second) {
            throw DataError("duplicate feature column name '" + col.name + "'");
        }
    }
    if (seen.count(target_name_) != 0) {
        throw DataError("target '" + target_name_ + "' is also a feature column");
    }
}

std::size_t Schema::index_of(const std::string& name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].name == name) return j;
    }
    throw DataError("unknown feature column '" + name + "'");
}

bool Schema::contains(const std::string& name) const {
    for (const auto& col : columns_) {
        if (col.name == name) return true;
    }
    return false;
}

void validate(const Schema& schema, std::span<const double> features,
              std::span<const double> target) {
    const std::size_t m = schema.m();
    if (m == 0) throw DataError("schema has no feature columns");
    if (features.size() % m != 0) {
        throw DataError("feature matrix size " + std::to_string(features.size()) +
                        " is not a multiple of m=" + std::to_string(m));
    }
    const std::size_t n = features.size() / m;
    if (target.size() != n) {
        throw DataError("length mismatch: target has " + std::to_string(target.size()) +
                        " values but the feature matrix has " + std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = features[i * m + j];
            const auto& col = schema.column(j);
            if (!std::isfinite(v)) {
                throw DataError("non-finite value in column '" + col.name + "' at row " +
                                std::to_string(i));
            }
            if (col.kind == ColumnKind::Binary && v != 0.0 && v != 1.0) {
                std::ostringstream os;
                os << "binary column '" << col.name << "' holds " << v << " at row " << i;
                throw DataError(os.str());
            }
        }
        if (!std::isfinite(target[i])) {
            throw DataError("non-finite target at row " + std::to_string(i));
        }
    }
}

void validate(const DataFrame& frame) {
    validate(frame.schema(), frame.features(), frame.targets());
}

DataFrame::DataFrame(Schema schema, std::vector<double> features, std::vector<double> target)
    : schema_(std::move(schema)), features_(std::move(features)), target_(std::move(target)) {
    validate(schema_, features_, target_);
}

std::vector<double> DataFrame::column_values(std::size_t j) const {
    std::vector<double> out(n());
    for (std::size_t i = 0; i < n(); ++i) out[i] = at(i, j);
    return out;
}

DataFrame DataFrame::take(std::span<const std::size_t> rows) const {
    DataFrame out;
    out.schema_ = schema_;
    out.features_.reserve(rows.size() * m());
    out.target_.reserve(rows.size());
    for (std::size_t i : rows) {
        const auto r = row(i);
        out.features_.insert(out.features_.end(), r.begin(), r.end());
        out.target_.push_back(target_.at(i));
    }
    return out;
}

Bounds::Bounds(double lower_, double upper_) : lower(lower_), upper(upper_) {
    if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
        std::ostringstream os;
        os << "invalid bounds [" << lower << ", " << upper << "]: need lower < upper";
        throw DataError(os.str());
    }
}

std::size_t FittedHistogram::bin_of(double y) const {
    const double pos = (y - bounds.lower) / bin_width();
    if (pos <= 0.0) return 0;
    const auto idx = static_cast<std::size_t>(std::floor(pos));
    return idx >= h ? h - 1 : idx;
}

void check_histogram(const FittedHistogram& hist) {
    if (hist.h < 1) throw DataError("histogram needs h >= 1");
    if (hist.counts.size() != hist.h) {
        throw DataError("histogram has " + std::to_string(hist.counts.size()) +
                        " counts for h=" + std::to_string(hist.h));
    }
    const auto total = std::accumulate(hist.counts.begin(), hist.counts.end(), std::uint64_t{0});
    if (total != hist.n) {
        throw DataError("histogram counts sum to " + std::to_string(total) + " but n=" +
                        std::to_string(hist.n));
    }
}

double SplitCondition::threshold() const {
    if (const auto* c = std::get_if<ContinuousSplit>(&kind)) return c->threshold;
    return 0.5;
}

void FitConfig::check() const {
    if (c < 1) throw DataError("c must be >= 1");
    if (g < 1) throw DataError("g must be >= 1");
    if (!(boundary_pad >= 0.0) || !std::isfinite(boundary_pad)) {
        throw DataError("boundary_pad must be >= 0");
    }
    if (min_leaf < 1) throw DataError("min_leaf must be >= 1");
}

CdTree::CdTree(Schema schema, Bounds bounds, FitConfig config, std::vector<TreeNode> nodes)
    : schema_(std::move(schema)), bounds_(bounds), config_(config), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DataError("tree has no nodes");
    // Every node except the root must be referenced exactly once.
    std::vector<int> refs(nodes_.size(), 0);
    std::vector<NodeId> stack{root()};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        ++visited;
        const auto& node = nodes_[id];
        if (node.is_leaf()) {
            check_histogram(node.hist);
            if (!(node.hist.bounds == bounds_)) {
                throw DataError("leaf " + std::to_string(id) + " does not use the tree bounds");
            }
            continue;
        }
        const auto& split = *node.split;
        if (split.feature >= schema_.m()) {
            throw DataError("split on feature index " + std::to_string(split.feature) +
                            " outside schema");
        }
        const bool binary_col = schema_.column(split.feature).kind == ColumnKind::Binary;
        if (binary_col != split.is_binary()) {
            throw DataError("split kind does not match column '" +
                            schema_.column(split.feature).name + "'");
        }
        if (const auto* c = std::get_if<ContinuousSplit>(&split.kind); c && c->granularity < 1) {
            throw DataError("split granularity must be >= 1");
        }
        for (NodeId child : {node.left, node.right}) {
            if (child == root() || child >= nodes_.size() || ++refs[child] > 1) {
                throw DataError("node " + std::to_string(id) + " has an invalid child reference");
            }
            stack.push_back(child);
        }
    }
    if (visited != nodes_.size()) throw DataError("tree contains unreachable nodes");
}

std::vector<NodeId> CdTree::leaves() const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{root()};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const auto& node = nodes_[id];
        if (node.is_leaf()) {
            out.push_back(id);
        } else {
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
    return out;
}

std::vector<NodeId> CdTree::internal_nodes() const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{root()};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const auto& node = nodes_[id];
        if (!node.is_leaf()) {
            out.push_back(id);
            stack.push_back(node.right);
            stack.push_back(node.left);
        }
    }
    return out;
}

std::size_t CdTree::leaf_count() const { return leaves().size(); }

MdlScore MdlScore::assemble(double data_nll, double regret, double structure, double split,
                            double bin_count) {
    MdlScore s;
    s.data_nll_bits = data_nll;
    s.regret_bits = regret;
    s.structure_bits = structure;
    s.split_bits = split;
    s.bin_count_bits = bin_count;
    s.total_bits = data_nll + regret + structure + split + bin_count;
    return s;
}

}  // namespace cdtree
