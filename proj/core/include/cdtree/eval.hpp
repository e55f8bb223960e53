#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cdtree/core.hpp"
#include "cdtree/learner.hpp"

namespace cdtree {

// ln(1e-10): log density assigned to zero-density test events by default.
inline const double kDefaultClampFloorNats = std::log(1e-10);

struct EvalReport {
    std::size_t n_test = 0;
    double mean_nll_nats = 0.0;
    std::size_t zero_density_events = 0;
    double clamp_floor_nats = kDefaultClampFloorNats;
};

struct CvReport {
    std::vector<EvalReport> folds;
    std::vector<std::size_t> leaf_counts;
    double mean_nll_nats = 0.0;
    double sd_nll_nats = 0.0;  // sample sd (n - 1 denominator)
    double mean_leaves = 0.0;
};

// Mean of -ln f(y|x) over `test`. Zero-density rows are counted and scored
// with clamp_floor_nats instead of -inf. Throws DataError on schema mismatch.
EvalReport evaluate_nll(const CdTree& tree, const DataFrame& test,
                        double clamp_floor_nats = kDefaultClampFloorNats);

// Fits on each training fold and evaluates on its test fold.
CvReport cross_validate(const DataFrame& frame, std::size_t folds, const FitConfig& config,
                        std::uint64_t seed, double clamp_floor_nats = kDefaultClampFloorNats);

// Internal nodes splitting on any of `columns`. Throws DataError for names
// missing from the schema.
std::size_t count_irrelevant_splits(const CdTree& tree, const std::set<std::string>& columns);

std::size_t leaf_count(const CdTree& tree);

}  // namespace cdtree
