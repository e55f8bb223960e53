#include "cdtree/learner.hpp"

#include <algorithm>
#include <optional>

#include "cdtree/histogram.hpp"
#include "cdtree/inference.hpp"

namespace cdtree {

namespace {

Bounds training_bounds(const DataFrame& frame, double pad) {
    const auto [lo, hi] = std::minmax_element(frame.targets().begin(), frame.targets().end());
    if (!(*lo - pad < *hi + pad)) {
        throw DataError("target is constant and boundary_pad is 0; histogram bounds are empty");
    }
    return Bounds(*lo - pad, *hi + pad);
}

std::vector<double> targets_of(const DataFrame& frame, std::span<const std::size_t> rows) {
    std::vector<double> ys;
    ys.reserve(rows.size());
    for (std::size_t i : rows) ys.push_back(frame.target(i));
    return ys;
}

// Mutable per-leaf bookkeeping while growing.
struct LeafState {
    std::vector<std::size_t> rows;
    LeafScore score;
    bool searched = false;
    std::optional<SplitProposal> proposal;
};

}  // namespace

double model_code_length_bits(const CdTree& tree) {
    const auto leaves = tree.leaves();
    double bits = structure_code_bits(leaves.size());
    for (NodeId id : tree.internal_nodes()) {
        bits += split_code_bits(*tree.node(id).split, tree.schema().m(), tree.config().c);
    }
    for (NodeId id : leaves) bits += rissanen_code_length(tree.node(id).hist.h);
    return bits;
}

MdlScore total_mdl_score(const CdTree& tree, const DataFrame& frame, RegretCache& cache) {
    if (!(frame.schema() == tree.schema())) {
        throw DataError("frame schema does not match the tree schema");
    }
    std::vector<std::vector<double>> per_node(tree.nodes().size());
    for (std::size_t i = 0; i < frame.n(); ++i) {
        per_node[route(tree, frame.row(i))].push_back(frame.target(i));
    }
    const auto leaves = tree.leaves();
    double nll = 0.0;
    double regret = 0.0;
    double bins = 0.0;
    for (NodeId id : leaves) {
        const auto hist = fit_histogram(per_node[id], tree.bounds(), tree.node(id).hist.h);
        nll += histogram_nll_bits(hist);
        regret += log_multinomial_regret(hist.n, hist.h, cache);
        bins += rissanen_code_length(hist.h);
    }
    double splits = 0.0;
    for (NodeId id : tree.internal_nodes()) {
        splits += split_code_bits(*tree.node(id).split, tree.schema().m(), tree.config().c);
    }
    return MdlScore::assemble(nll, regret, structure_code_bits(leaves.size()), splits, bins);
}

MdlScore total_mdl_score(const CdTree& tree, const DataFrame& frame) {
    RegretCache cache;
    return total_mdl_score(tree, frame, cache);
}

FitResult fit(const DataFrame& frame, const FitConfig& config, const FitOptions& options) {
    RegretCache cache;
    return fit(frame, config, cache, options);
}

FitResult fit(const DataFrame& frame, const FitConfig& config, RegretCache& cache,
              const FitOptions& options) {
    config.check();
    if (frame.n() == 0) throw DataError("cannot fit a tree on an empty frame");
    const Bounds bounds = training_bounds(frame, config.boundary_pad);

    std::vector<TreeNode> nodes(1);
    std::vector<LeafState> state(1);
    state[0].rows.resize(frame.n());
    for (std::size_t i = 0; i < frame.n(); ++i) state[0].rows[i] = i;
    {
        const auto ys = targets_of(frame, state[0].rows);
        state[0].score = optimal_histogram(ys, bounds, config.g, cache);
        nodes[0].hist = fit_histogram(ys, bounds, state[0].score.h);
    }

    FitTrace trace;
    trace.initial_bits = state[0].score.total_bits + structure_code_bits(1);
    double total = trace.initial_bits;
    std::vector<NodeId> leaves{0};  // depth-first order

    for (std::size_t iteration = 0;; ++iteration) {
        const std::size_t k = leaves.size();
        std::optional<std::size_t> chosen;  // position in `leaves`
        double chosen_delta = 0.0;
        for (std::size_t pos = 0; pos < leaves.size(); ++pos) {
            auto& leaf = state[leaves[pos]];
            if (!leaf.searched || !options.reuse_leaf_searches) {
                leaf.proposal = search_split(NodeRows{frame, leaf.rows}, bounds, config, cache,
                                             leaf.score, k);
                leaf.searched = true;
            }
            if (!leaf.proposal) continue;
            const double delta =
                leaf.proposal->children_bits() + structure_delta_bits(k) - leaf.score.total_bits;
            if (delta < 0.0 && (!chosen || delta < chosen_delta)) {
                chosen = pos;
                chosen_delta = delta;
            }
        }
        if (!chosen) break;

        const NodeId parent = leaves[*chosen];
        SplitProposal proposal = *state[parent].proposal;
        const NodeId left = nodes.size();
        const NodeId right = left + 1;
        nodes.resize(nodes.size() + 2);
        state.resize(state.size() + 2);

        for (std::size_t i : state[parent].rows) {
            const bool go_left = proposal.condition.goes_left(frame.at(i, proposal.condition.feature));
            state[go_left ? left : right].rows.push_back(i);
        }
        state[left].score = proposal.left_score;
        state[right].score = proposal.right_score;
        nodes[left].hist = fit_histogram(targets_of(frame, state[left].rows), bounds,
                                         proposal.left_score.h);
        nodes[right].hist = fit_histogram(targets_of(frame, state[right].rows), bounds,
                                          proposal.right_score.h);
        if (state[left].rows.size() != proposal.left_n ||
            state[right].rows.size() != proposal.right_n) {
            throw ComputeError("split partition disagrees with the evaluated proposal");
        }

        nodes[parent].split = proposal.condition;
        nodes[parent].left = left;
        nodes[parent].right = right;
        nodes[parent].hist = FittedHistogram{};
        nodes[parent].hist.counts = {0};
        state[parent] = LeafState{};

        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(*chosen));
        leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(*chosen), {left, right});

        FitStep step;
        step.iteration = iteration;
        step.leaf = parent;
        step.condition = proposal.condition;
        step.total_bits_before = total;
        total += chosen_delta;
        step.total_bits_after = total;
        trace.steps.push_back(step);
    }

    // Internal nodes carry a placeholder histogram over the shared bounds.
    for (auto& node : nodes) {
        if (!node.is_leaf()) node.hist.bounds = bounds;
    }
    return FitResult{CdTree(frame.schema(), bounds, config, std::move(nodes)), std::move(trace)};
}

}  // namespace cdtree
