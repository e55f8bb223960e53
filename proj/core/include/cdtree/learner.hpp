#pragma once

#include <cstddef>
#include <vector>

#include "cdtree/codes.hpp"
#include "cdtree/core.hpp"
#include "cdtree/splitter.hpp"

namespace cdtree {

struct FitStep {
    std::size_t iteration = 0;
    NodeId leaf = 0;  // leaf that was replaced by an internal node
    SplitCondition condition;
    double total_bits_before = 0.0;
    double total_bits_after = 0.0;
};

struct FitTrace {
    double initial_bits = 0.0;  // score of the root-only tree
    std::vector<FitStep> steps;

    double final_bits() const { return steps.empty() ? initial_bits : steps.back().total_bits_after; }
};

struct FitResult {
    CdTree tree;
    FitTrace trace;
};

struct FitOptions {
    // Reuse the split searches of leaves untouched by the last split. Turning
    // this off re-searches every leaf each round, which yields the same tree.
    bool reuse_leaf_searches = true;
};

// L_N(K) + log2 Catalan(K-1) + sum of split codes + sum of L_N(h_k). The
// boundary cost is constant across models and omitted.
double model_code_length_bits(const CdTree& tree);

// Full MDL score of `tree` on `frame`, recounting every leaf from scratch.
// Throws DataError on schema mismatch or targets outside the tree bounds.
MdlScore total_mdl_score(const CdTree& tree, const DataFrame& frame, RegretCache& cache);
MdlScore total_mdl_score(const CdTree& tree, const DataFrame& frame);

// Greedy growth: repeatedly applies the single split that lowers the total
// score the most until no split lowers it. Throws DataError on an empty frame
// or invalid config.
FitResult fit(const DataFrame& frame, const FitConfig& config, const FitOptions& options = {});
FitResult fit(const DataFrame& frame, const FitConfig& config, RegretCache& cache,
              const FitOptions& options = {});

}  // namespace cdtree
