#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cdtree {

// Error raised for malformed input (schemas, frames, CSV files, flags).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Error raised when a computation cannot proceed on otherwise valid input.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ColumnKind { Continuous, Binary };

// How a feature column is derived from the raw CSV columns. Kept on the
// schema so a saved model can re-encode unseen files identically.
struct DirectEncoding {
    friend bool operator==(const DirectEncoding&, const DirectEncoding&) = default;
};
struct NumericBinaryEncoding {
    double low = 0.0;   // raw value mapped to 0.0
    double high = 1.0;  // raw value mapped to 1.0
    friend bool operator==(const NumericBinaryEncoding&, const NumericBinaryEncoding&) = default;
};
struct OneHotEncoding {
    std::string source;
    std::string level;
    friend bool operator==(const OneHotEncoding&, const OneHotEncoding&) = default;
};
using ColumnEncoding = std::variant<DirectEncoding, NumericBinaryEncoding, OneHotEncoding>;

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    ColumnEncoding encoding = DirectEncoding{};
    friend bool operator==(const Column&, const Column&) = default;
};

class Schema {
public:
    Schema() = default;
    Schema(std::vector<Column> columns, std::string target_name);

    const std::vector<Column>& columns() const { return columns_; }
    const Column& column(std::size_t j) const { return columns_.at(j); }
    const std::string& target_name() const { return target_name_; }
    std::size_t m() const { return columns_.size(); }

    // Index of the named feature column; throws DataError when absent.
    std::size_t index_of(const std::string& name) const;
    bool contains(const std::string& name) const;

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::vector<Column> columns_;
    std::string target_name_;
};

// Row-major feature matrix plus a continuous target. Binary columns hold 0.0/1.0.
class DataFrame {
public:
    DataFrame() = default;
    // Throws DataError if any invariant is violated (see validate()).
    DataFrame(Schema schema, std::vector<double> features, std::vector<double> target);

    const Schema& schema() const { return schema_; }
    std::size_t n() const { return target_.size(); }
    std::size_t m() const { return schema_.m(); }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * m(), m()};
    }
    double at(std::size_t i, std::size_t j) const { return features_[i * m() + j]; }
    double target(std::size_t i) const { return target_[i]; }
    const std::vector<double>& targets() const { return target_; }
    const std::vector<double>& features() const { return features_; }

    std::vector<double> column_values(std::size_t j) const;

    // New frame holding the given rows, in order.
    DataFrame take(std::span<const std::size_t> rows) const;

    friend bool operator==(const DataFrame& a, const DataFrame& b) = default;

private:
    Schema schema_;
    std::vector<double> features_;
    std::vector<double> target_;
};

// Checks every DataFrame invariant on raw parts; throws DataError naming the
// first violation (row/column location where applicable).
void validate(const Schema& schema, std::span<const double> features,
              std::span<const double> target);
void validate(const DataFrame& frame);

struct Bounds {
    double lower = 0.0;
    double upper = 1.0;

    Bounds() = default;
    Bounds(double lower, double upper);

    double width() const { return upper - lower; }
    bool contains(double y) const { return y >= lower && y <= upper; }

    friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct FittedHistogram {
    Bounds bounds;
    std::size_t h = 1;
    std::vector<std::uint64_t> counts;
    std::uint64_t n = 0;

    double bin_width() const { return bounds.width() / static_cast<double>(h); }
    // Bin index of y: min(floor((y - lower) / w), h - 1). Requires bounds.contains(y).
    std::size_t bin_of(double y) const;

    friend bool operator==(const FittedHistogram&, const FittedHistogram&) = default;
};

// Throws DataError unless sum(counts) == n, h >= 1 and counts.size() == h.
void check_histogram(const FittedHistogram& hist);

struct ContinuousSplit {
    double threshold = 0.0;
    std::uint32_t granularity = 1;
    friend bool operator==(const ContinuousSplit&, const ContinuousSplit&) = default;
};
struct BinarySplit {
    friend bool operator==(const BinarySplit&, const BinarySplit&) = default;
};

struct SplitCondition {
    std::size_t feature = 0;
    std::variant<ContinuousSplit, BinarySplit> kind;

    bool is_binary() const { return std::holds_alternative<BinarySplit>(kind); }
    // Binary splits cut at 0.5.
    double threshold() const;
    bool goes_left(double x) const { return x <= threshold(); }

    friend bool operator==(const SplitCondition&, const SplitCondition&) = default;
};

struct FitConfig {
    std::uint32_t c = 5;
    std::uint32_t g = 30;
    double boundary_pad = 1e-3;
    std::uint32_t min_leaf = 1;
    std::uint64_t seed = 0;

    // Throws DataError with a message such as "c must be >= 1".
    void check() const;

    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

using NodeId = std::size_t;

// Nodes live in a flat arena; children are referenced by index.
struct TreeNode {
    std::optional<SplitCondition> split;  // empty for leaves
    NodeId left = 0;
    NodeId right = 0;
    FittedHistogram hist;  // meaningful for leaves only

    bool is_leaf() const { return !split.has_value(); }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class CdTree {
public:
    CdTree() = default;
    // Throws DataError unless the nodes form a full binary tree rooted at 0
    // whose leaves all share `bounds` and whose splits match the schema.
    CdTree(Schema schema, Bounds bounds, FitConfig config, std::vector<TreeNode> nodes);

    const Schema& schema() const { return schema_; }
    const Bounds& bounds() const { return bounds_; }
    const FitConfig& config() const { return config_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& node(NodeId id) const { return nodes_.at(id); }
    static constexpr NodeId root() { return 0; }

    // Leaf ids in depth-first (left before right) order.
    std::vector<NodeId> leaves() const;
    std::vector<NodeId> internal_nodes() const;
    std::size_t leaf_count() const;

    friend bool operator==(const CdTree&, const CdTree&) = default;

private:
    Schema schema_;
    Bounds bounds_;
    FitConfig config_;
    std::vector<TreeNode> nodes_;
};

struct MdlScore {
    double data_nll_bits = 0.0;
    double regret_bits = 0.0;
    double structure_bits = 0.0;
    double split_bits = 0.0;
    double bin_count_bits = 0.0;
    double total_bits = 0.0;

    static MdlScore assemble(double data_nll, double regret, double structure, double split,
                             double bin_count);
};

}  // namespace cdtree
