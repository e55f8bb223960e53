#include "cdtree/eval.hpp"

#include <numeric>

#include "cdtree/data.hpp"
#include "cdtree/inference.hpp"

namespace cdtree {

EvalReport evaluate_nll(const CdTree& tree, const DataFrame& test, double clamp_floor_nats) {
    if (!(test.schema() == tree.schema())) {
        throw DataError("test frame schema does not match the model schema");
    }
    EvalReport report;
    report.n_test = test.n();
    report.clamp_floor_nats = clamp_floor_nats;
    double sum = 0.0;
    for (std::size_t i = 0; i < test.n(); ++i) {
        double ld = log_density(tree, test.row(i), test.target(i));
        if (std::isinf(ld) && ld < 0.0) {
            ++report.zero_density_events;
            ld = clamp_floor_nats;
        }
        sum += ld;
    }
    report.mean_nll_nats = test.n() == 0 ? 0.0 : -sum / static_cast<double>(test.n());
    return report;
}

CvReport cross_validate(const DataFrame& frame, std::size_t folds, const FitConfig& config,
                        std::uint64_t seed, double clamp_floor_nats) {
    CvReport report;
    RegretCache cache;
    for (const auto& fold : kfold(frame, folds, seed)) {
        const auto result = fit(fold.train, config, cache);
        report.folds.push_back(evaluate_nll(result.tree, fold.test, clamp_floor_nats));
        report.leaf_counts.push_back(result.tree.leaf_count());
    }
    const double k = static_cast<double>(report.folds.size());
    double sum = 0.0;
    for (const auto& f : report.folds) sum += f.mean_nll_nats;
    report.mean_nll_nats = sum / k;
    double ss = 0.0;
    for (const auto& f : report.folds) {
        ss += (f.mean_nll_nats - report.mean_nll_nats) * (f.mean_nll_nats - report.mean_nll_nats);
    }
    report.sd_nll_nats = std::sqrt(ss / (k - 1.0));
    report.mean_leaves =
        static_cast<double>(std::accumulate(report.leaf_counts.begin(), report.leaf_counts.end(),
                                            std::size_t{0})) /
        k;
    return report;
}

std::size_t count_irrelevant_splits(const CdTree& tree, const std::set<std::string>& columns) {
    std::set<std::size_t> indices;
    for (const auto& name : columns) indices.insert(tree.schema().index_of(name));
    std::size_t count = 0;
    for (NodeId id : tree.internal_nodes()) {
        if (indices.count(tree.node(id).split->feature) != 0) ++count;
    }
    return count;
}

std::size_t leaf_count(const CdTree& tree) { return tree.leaf_count(); }

}  // namespace cdtree
