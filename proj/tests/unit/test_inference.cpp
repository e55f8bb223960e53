#include <cmath>
#include <random>

#include "cdtree/data.hpp"
#include "cdtree/inference.hpp"
#include "cdtree/learner.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace cdtree;

namespace {

// x1 <= 0.5 -> leaf {3,1} on two bins; otherwise one bin holding 4.
// A third tree variant has an empty bin.
CdTree small_tree(std::vector<std::uint64_t> left_counts = {3, 1}) {
    const auto f = gen::frame({{0.1, 0.9}, {0, 1}}, {0.2, 0.8},
                              {ColumnKind::Continuous, ColumnKind::Binary});
    const Bounds b{0.0, 1.0};
    std::vector<TreeNode> nodes(3);
    nodes[0].split = SplitCondition{0, ContinuousSplit{0.5, 1}};
    nodes[0].left = 1;
    nodes[0].right = 2;
    nodes[0].hist = FittedHistogram{b, 1, {0}, 0};
    const std::uint64_t n = left_counts[0] + left_counts[1];
    nodes[1].hist = FittedHistogram{b, 2, left_counts, n};
    nodes[2].hist = FittedHistogram{b, 1, {4}, 4};
    return CdTree(f.schema(), b, {}, nodes);
}

}  // namespace

TEST_CASE("log density by hand") {
    const auto t = small_tree();
    const std::vector<double> lx{0.2, 0.0};
    const std::vector<double> rx{0.7, 1.0};
    CHECK(log_density(t, lx, 0.1) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    CHECK(log_density(t, lx, 0.75) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(log_density(t, lx, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(log_density(t, rx, 0.3) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isinf(log_density(t, lx, 1.5)));
    CHECK(std::isinf(log_density(t, lx, -0.1)));
    const auto gap = small_tree({4, 0});
    CHECK(std::isinf(log_density(gap, lx, 0.9)));
    CHECK(log_density(gap, lx, 0.1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("route validates its input") {
    const auto t = small_tree();
    CHECK(route(t, std::vector<double>{0.5, 0.0}) == 1);  // x <= s goes left
    CHECK(route(t, std::vector<double>{0.5000001, 0.0}) == 2);
    CHECK_THROWS_AS(route(t, std::vector<double>{0.5}), DataError);
    CHECK_THROWS_AS(route(t, std::vector<double>{0.5, 0.5}), DataError);
    CHECK_THROWS_AS(route(t, std::vector<double>{NAN, 0.0}), DataError);
}

TEST_CASE("density grid") {
    const auto t = small_tree();
    const std::vector<double> lx{0.2, 0.0};
    const auto mids = density_grid(t, lx, 2);
    REQUIRE(mids.size() == 2);
    CHECK(mids[0].first == doctest::Approx(0.25));
    CHECK(mids[0].second == doctest::Approx(1.5));
    CHECK(mids[1].first == doctest::Approx(0.75));
    CHECK(mids[1].second == doctest::Approx(0.5));
    const auto grid = density_grid(t, lx, 5);
    REQUIRE(grid.size() == 5);
    CHECK(grid.front().first == 0.0);
    CHECK(grid.back().first == 1.0);
    CHECK(grid[2].first == doctest::Approx(0.5));
    CHECK(grid[2].second == doctest::Approx(0.5));  // bin 1 starts at 0.5
    CHECK_THROWS_AS(density_grid(t, lx, 1), DataError);
}

TEST_CASE("leaf densities integrate to one") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto f = make_step_dataset(500, 2, seed);
        const auto r = fit(f, {});
        for (NodeId id : r.tree.leaves()) {
            const auto& h = r.tree.node(id).hist;
            if (h.n == 0) continue;
            double mass = 0.0;
            for (auto c : h.counts) {
                mass += static_cast<double>(c) / (static_cast<double>(h.n) * h.bin_width()) * h.bin_width();
            }
            CHECK(std::abs(mass - 1.0) <= 1e-9);
        }
        std::mt19937_64 rng(seed);
        for (int k = 0; k < 5; ++k) {
            const auto x = f.row(rng() % f.n());
            const auto grid = density_grid(r.tree, x, 20001);
            double area = 0.0;
            for (std::size_t i = 1; i < grid.size(); ++i) {
                area += 0.5 * (grid[i].second + grid[i - 1].second) * (grid[i].first - grid[i - 1].first);
            }
            CHECK(std::abs(area - 1.0) <= 1e-3);
        }
    }
}

TEST_CASE("leaf rules partition the feature space") {
    const auto f = make_step_dataset(800, 3, 5);
    const auto r = fit(f, {});
    const auto rules = leaf_rules(r.tree);
    REQUIRE(rules.size() == r.tree.leaf_count());
    CHECK(rules.front().leaf == r.tree.leaves().front());
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    for (int k = 0; k < 2000; ++k) {
        std::vector<double> x(f.m());
        x[0] = u(rng);
        for (std::size_t j = 1; j < x.size(); ++j) x[j] = z(rng);
        int hits = 0;
        NodeId hit = 0;
        for (const auto& rule : rules) {
            if (rule.matches(x)) {
                ++hits;
                hit = rule.leaf;
            }
        }
        CHECK(hits == 1);
        CHECK(hit == route(r.tree, x));
    }
}

TEST_CASE("rule rendering") {
    const auto t = small_tree();
    const auto rules = leaf_rules(t);
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].render() == "x1 <= 0.5 -> leaf(n=4, h=2)");
    CHECK(rules[1].render() == "x1 > 0.5 -> leaf(n=4, h=1)");
    RuleCondition b{1, "smoker", Relation::Greater, 0.5, true};
    CHECK(b.render() == "smoker = 1");
    b.relation = Relation::LessEqual;
    CHECK(b.render() == "smoker = 0");

    const auto f = gen::frame({{0.1, 0.2}}, {0.3, 0.4});
    std::vector<TreeNode> one(1);
    one[0].hist = FittedHistogram{{0.0, 1.0}, 1, {2}, 2};
    const CdTree root(f.schema(), {0.0, 1.0}, {}, one);
    CHECK(leaf_rules(root).at(0).render() == "(all) -> leaf(n=2, h=1)");
}

TEST_CASE("redundant conditions collapse to the tightest bound") {
    const auto f = gen::frame({{0.1, 0.9}}, {0.2, 0.8});
    const Bounds b{0.0, 1.0};
    std::vector<TreeNode> nodes(5);
    auto leafnode = [&](std::size_t id) { nodes[id].hist = FittedHistogram{b, 1, {1}, 1}; };
    nodes[0].split = SplitCondition{0, ContinuousSplit{0.7, 1}};
    nodes[0].left = 1;
    nodes[0].right = 4;
    nodes[0].hist = FittedHistogram{b, 1, {0}, 0};
    nodes[1].split = SplitCondition{0, ContinuousSplit{0.3, 2}};
    nodes[1].left = 2;
    nodes[1].right = 3;
    nodes[1].hist = FittedHistogram{b, 1, {0}, 0};
    leafnode(2);
    leafnode(3);
    leafnode(4);
    const CdTree t(f.schema(), b, {}, nodes);
    const auto rules = leaf_rules(t);
    REQUIRE(rules.size() == 3);
    CHECK(rules[0].render() == "x1 <= 0.3 -> leaf(n=1, h=1)");
    CHECK(rules[1].render() == "x1 <= 0.7 AND x1 > 0.3 -> leaf(n=1, h=1)");
    CHECK(rules[2].render() == "x1 > 0.7 -> leaf(n=1, h=1)");
}
