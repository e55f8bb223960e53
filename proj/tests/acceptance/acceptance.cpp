// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any fail.
//
// Criterion 11 reads CDTREE_ACCEPTANCE_CSV and CDTREE_ACCEPTANCE_TARGET when set;
// otherwise it runs on a generated 1030 x 8 stand-in.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cdtree/codes.hpp"
#include "cdtree/data.hpp"
#include "cdtree/eval.hpp"
#include "cdtree/histogram.hpp"
#include "cdtree/inference.hpp"
#include "cdtree/learner.hpp"
#include "commands.hpp"
#include "model_file.hpp"
#include "oracle.hpp"

using namespace cdtree;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Trees fitted along the way; criteria 4, 5 and 9 run over all of them.
struct Fitted {
    std::string label;
    DataFrame frame;
    FitResult result;
};
std::vector<Fitted> corpus;

void remember(std::string label, const DataFrame& frame, const FitResult& r) {
    corpus.push_back({std::move(label), frame, r});
}

DataFrame head_rows(const DataFrame& f, std::size_t from, std::size_t count) {
    std::vector<std::size_t> rows(count);
    for (std::size_t i = 0; i < count; ++i) rows[i] = from + i;
    return f.take(rows);
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    RegretCache cache;
    double worst = 0.0;
    for (std::uint64_t n = 1; n <= 8; ++n) {
        for (std::uint64_t k = 1; k <= 5; ++k) {
            worst = std::max(worst, std::abs(log_multinomial_regret(n, k, cache) - regret_oracle(n, k)));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 1.0,
            "max |diff| = " + fmt("%.3g", worst) + " bits, " + fmt("%.3f", secs) + " s"};
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    RegretCache cache;
    const double big = log_multinomial_regret(20000, 500, cache);
    std::vector<std::uint64_t> ns, ks;
    for (int i = 0; i < 20; ++i) {
        ns.push_back(static_cast<std::uint64_t>(std::llround(std::pow(20000.0, i / 19.0))));
        ks.push_back(1 + static_cast<std::uint64_t>(std::llround(499.0 * i / 19.0)));
    }
    std::vector<std::vector<double>> grid(20, std::vector<double>(20));
    bool finite = std::isfinite(big);
    for (int a = 0; a < 20; ++a) {
        for (int b = 0; b < 20; ++b) {
            grid[a][b] = log_multinomial_regret(ns[a], ks[b], cache);
            finite = finite && std::isfinite(grid[a][b]);
        }
    }
    int violations = 0;
    for (int a = 0; a < 20; ++a) {
        for (int b = 0; b < 20; ++b) {
            if (a > 0 && grid[a][b] < grid[a - 1][b]) ++violations;
            if (b > 0 && grid[a][b] < grid[a][b - 1]) ++violations;
        }
    }
    const double secs = seconds_since(t0);
    return {finite && violations == 0 && secs < 2.0,
            "log2 R(20000,500) = " + fmt("%.4f", big) + ", monotonicity violations " +
                std::to_string(violations) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome criterion3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    RegretCache cache;
    const std::size_t g = FitConfig{}.g;
    int mismatches = 0;
    std::vector<int> by_family(6, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 59;
        const int family = trial % 6;
        const auto v = gen::sample(rng, family, n);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        const Bounds b{*lo - 1e-3, *hi + 1e-3};
        const auto got = optimal_histogram(v, b, g, cache);
        std::size_t best_h = 1;
        double best = leaf_score(v, b, 1, cache).total_bits;
        for (std::size_t h = 2; h <= n + 2 * g; ++h) {
            const double s = leaf_score(v, b, h, cache).total_bits;
            if (s < best) {
                best = s;
                best_h = h;
            }
        }
        if (got.h != best_h || std::abs(got.total_bits - best) > 1e-9) {
            ++mismatches;
            ++by_family[family];
        }
    }
    const double secs = seconds_since(t0);
    std::string fam;
    const char* names[] = {"uniform", "gaussian", "exponential", "student-t", "bimodal", "atoms"};
    for (int f = 0; f < 6; ++f) fam += std::string(f ? ", " : "") + names[f] + " " + std::to_string(by_family[f]);
    return {mismatches == 0 && secs < 30.0,
            std::to_string(mismatches) + "/200 samples differ from exhaustive search (" + fam + "), " +
                fmt("%.2f", secs) + " s"};
}

Outcome criterion4() {
    double worst_track = 0.0, worst_ref = 0.0;
    bool regret_exact = true;
    for (const auto& c : corpus) {
        RegretCache cache;
        const auto score = total_mdl_score(c.result.tree, c.frame, cache);
        worst_track = std::max(worst_track, std::abs(score.total_bits - c.result.trace.final_bits()));
        worst_ref = std::max(worst_ref, std::abs(score.total_bits - oracle::tree_total_bits(c.result.tree, c.frame)));
        double regret = 0.0;
        for (NodeId id : c.result.tree.leaves()) {
            const auto& h = c.result.tree.node(id).hist;
            regret += log_multinomial_regret(h.n, h.h, cache);
        }
        regret_exact = regret_exact && regret == score.regret_bits;
    }
    return {!corpus.empty() && worst_track <= 1e-6 && worst_ref <= 1e-6 && regret_exact,
            std::to_string(corpus.size()) + " trees; max |tracked - recomputed| = " + fmt("%.3g", worst_track) +
                " bits, max |recomputed - reference| = " + fmt("%.3g", worst_ref) +
                " bits, regret sum exact: " + (regret_exact ? "yes" : "no")};
}

Outcome criterion5() {
    std::size_t bad = 0, steps = 0;
    for (const auto& c : corpus) {
        double prev = c.result.trace.initial_bits;
        for (const auto& s : c.result.trace.steps) {
            ++steps;
            if (!(s.total_bits_after < s.total_bits_before) || s.total_bits_before != prev) ++bad;
            prev = s.total_bits_after;
        }
        if (c.result.trace.steps.size() + 1 != c.result.tree.leaf_count() ||
            c.result.trace.steps.size() >= std::max<std::size_t>(c.frame.n(), 1)) {
            ++bad;
        }
    }
    return {!corpus.empty() && bad == 0,
            std::to_string(corpus.size()) + " fits terminated, " + std::to_string(steps) +
                " steps, non-decreasing or broken links: " + std::to_string(bad)};
}

Outcome criterion6() {
    int recovered = 0, nll_ok = 0;
    double slowest = 0.0, worst_gap = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto train = make_step_dataset(2000, 0, seed);
        const auto test = make_step_dataset(2000, 0, seed + 1000);
        const auto t0 = Clock::now();
        const auto r = fit(train, {});
        slowest = std::max(slowest, seconds_since(t0));
        remember("step seed " + std::to_string(seed), train, r);
        const auto& root = r.tree.node(CdTree::root());
        if (root.split && r.tree.schema().column(root.split->feature).name == "x1" &&
            root.split->threshold() >= 0.45 && root.split->threshold() <= 0.55) {
            ++recovered;
        }
        const double gap = std::abs(evaluate_nll(r.tree, test).mean_nll_nats + std::log(2.0));
        worst_gap = std::max(worst_gap, gap);
        nll_ok += gap <= 0.15;
    }
    return {recovered >= 9 && nll_ok == 10 && slowest < 10.0,
            "root split on x1 in [0.45,0.55]: " + std::to_string(recovered) +
                "/10; held-out NLL within 0.15 of -ln 2: " + std::to_string(nll_ok) +
                "/10 (max gap " + fmt("%.4f", worst_gap) + "); slowest fit " + fmt("%.2f", slowest) + " s"};
}

Outcome criterion7() {
    bool pass = true;
    std::string detail;
    for (NoiseMode mode : {NoiseMode::Independent, NoiseMode::Dependent}) {
        int clean = 0, stable = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            // 2000 training rows, 2000 held out
            const auto full = make_step_dataset(4000, 0, 500 + seed);
            const auto noisy = inject_noise_features(full, {mode, 20, seed});
            const auto base_train = head_rows(full, 0, 2000);
            const auto base_test = head_rows(full, 2000, 2000);
            const auto noisy_train = head_rows(noisy.frame, 0, 2000);
            const auto noisy_test = head_rows(noisy.frame, 2000, 2000);
            const auto base = fit(base_train, {});
            const auto res = fit(noisy_train, {});
            remember("robustness", noisy_train, res);
            const std::set<std::string> names(noisy.injected.begin(), noisy.injected.end());
            clean += count_irrelevant_splits(res.tree, names) == 0;
            const double delta = evaluate_nll(res.tree, noisy_test).mean_nll_nats -
                                 evaluate_nll(base.tree, base_test).mean_nll_nats;
            worst = std::max(worst, std::abs(delta));
            stable += std::abs(delta) < 0.05;
        }
        pass = pass && clean >= 9 && stable == 10;
        detail += std::string(detail.empty() ? "" : "; ") +
                  (mode == NoiseMode::Independent ? "independent" : "dependent") +
                  ": zero irrelevant splits " + std::to_string(clean) + "/10, |dNLL| < 0.05 " +
                  std::to_string(stable) + "/10 (max " + fmt("%.4f", worst) + ")";
    }
    return {pass, detail};
}

Outcome criterion8() {
    int single = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = make_null_dataset(500, 5, seed);
        const auto r = fit(f, {});
        remember("null", f, r);
        single += r.tree.leaf_count() == 1;
    }
    return {single >= 8, "K = 1 in " + std::to_string(single) + "/10 seeds"};
}

Outcome criterion9() {
    std::mt19937_64 rng(99);
    double worst_exact = 0.0, worst_trap = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const auto& c = corpus[rng() % corpus.size()];
        const auto& tree = c.result.tree;
        // half the points are training rows, half are perturbed
        const auto src = c.frame.row(rng() % c.frame.n());
        std::vector<double> x(src.begin(), src.end());
        if (pair % 2) {
            std::normal_distribution<double> z(0.0, 0.3);
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (tree.schema().column(j).kind == ColumnKind::Continuous) x[j] += z(rng);
            }
        }
        const auto& hist = tree.node(route(tree, x)).hist;
        const double w = hist.bin_width();
        double exact = 0.0;
        for (std::size_t j = 0; j < hist.h; ++j) {
            const double ld = log_density(tree, x, tree.bounds().lower + (j + 0.5) * w);
            if (std::isfinite(ld)) exact += std::exp(ld) * w;
        }
        worst_exact = std::max(worst_exact, std::abs(exact - 1.0));
        const auto grid = density_grid(tree, x, 1000001);
        double trap = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            trap += 0.5 * (grid[i].second + grid[i - 1].second) * (grid[i].first - grid[i - 1].first);
        }
        worst_trap = std::max(worst_trap, std::abs(trap - 1.0));
    }
    return {worst_exact <= 1e-9 && worst_trap <= 1e-3,
            "100 pairs; max |exact - 1| = " + fmt("%.3g", worst_exact) + ", max |trapezoid - 1| = " +
                fmt("%.3g", worst_trap)};
}

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("cdtree_accept_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int invoke(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    if (out) *out = o.str();
    return code;
}

Outcome criterion10() {
    Scratch s;
    const auto data = s.file("step.csv");
    bool ok = invoke({"synth", "step", "--n", "1500", "--noise", "3", "--seed", "12", "--out", data}) == 0;
    for (const char* m : {"a", "b"}) {
        ok = ok && invoke({"fit", "--train", data, "--target", "y", "--seed", "5", "--out",
                        s.file(std::string(m) + ".json")}) == 0;
        ok = ok && invoke({"predict", "--model", s.file(std::string(m) + ".json"), "--data", data, "--out",
                        s.file(std::string(m) + ".pred.csv")}) == 0;
    }
    const bool same_model = ok && slurp(s.file("a.json")) == slurp(s.file("b.json"));
    const bool same_pred = ok && slurp(s.file("a.pred.csv")) == slurp(s.file("b.pred.csv"));

    std::size_t checked = 0, differ = 0;
    if (ok) {
        const auto model = cli::load_model(s.file("a.json"));
        const auto back = cli::deserialize_model(cli::serialize_model(model));
        const auto frame = load_csv_with_schema(data, model.tree.schema());
        for (std::size_t i = 0; i < frame.n(); ++i) {
            for (double dy : {0.0, 0.013, -0.2}) {
                const double y = frame.target(i) + dy;
                const double a = log_density(model.tree, frame.row(i), y);
                const double b = log_density(back.tree, frame.row(i), y);
                ++checked;
                if (!(a == b)) ++differ;
            }
        }
        ok = back.tree == model.tree;
    }
    return {ok && same_model && same_pred && checked > 0 && differ == 0,
            std::string("model files identical: ") + (same_model ? "yes" : "no") +
                ", prediction files identical: " + (same_pred ? "yes" : "no") + ", round-trip log densities " +
                std::to_string(checked - differ) + "/" + std::to_string(checked) + " exact"};
}

Outcome criterion11() {
    Scratch s;
    std::string path, target, source;
    const char* env_csv = std::getenv("CDTREE_ACCEPTANCE_CSV");
    const char* env_target = std::getenv("CDTREE_ACCEPTANCE_TARGET");
    if (env_csv && env_target) {
        path = env_csv;
        target = env_target;
        source = path;
    } else {
        // 1030 rows, 8 features, target depending on two of them
        std::mt19937_64 rng(1030);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        std::ofstream out(s.file("standin.csv"));
        out << "f1,f2,f3,f4,f5,f6,f7,f8,strength\n";
        for (int i = 0; i < 1030; ++i) {
            double f[8];
            for (double& v : f) v = u(rng);
            const double y = 20.0 + 30.0 * f[0] + (f[3] > 0.6 ? 15.0 : 0.0) + 4.0 * (1 + f[1]) * z(rng);
            for (double v : f) out << v << ",";
            out << y << "\n";
        }
        path = s.file("standin.csv");
        target = "strength";
        source = "generated 1030x8 stand-in";
    }
    const auto t0 = Clock::now();
    std::string report;
    const int code = invoke({"cv", "--data", path, "--target", target, "--folds", "5"}, &report);
    const double secs = seconds_since(t0);
    std::string summary;
    const auto pos = report.find("mean_nll_nats,sd_nll_nats,mean_leaves\n");
    if (pos != std::string::npos) {
        summary = report.substr(pos + 38);
        while (!summary.empty() && summary.back() == '\n') summary.pop_back();
    }
    return {code == 0 && secs < 300.0 && !summary.empty(),
            "informative; " + source + ": mean_nll,sd,mean_leaves = " + summary + ", " +
                fmt("%.2f", secs) + " s"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    // 6-8 grow the tree corpus that 4, 5 and 9 inspect.
    const std::vector<Criterion> order{
        {1, "regret oracle equivalence", criterion1},   {2, "regret recurrence at scale", criterion2},
        {3, "histogram search oracle", criterion3},     {6, "synthetic step recovery", criterion6},
        {7, "robustness to injected features", criterion7}, {8, "refusal under pure noise", criterion8},
        {4, "score audit", criterion4},                 {5, "monotone descent", criterion5},
        {9, "density normalization", criterion9},       {10, "determinism and round trip", criterion10},
        {11, "cross-validation on a tabular file", criterion11},
    };
    std::vector<std::pair<int, std::string>> lines;
    int failures = 0;
    for (const auto& c : order) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(c.id) + "] " +
                                     c.name + ": " + o.detail);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [id, line] : lines) std::cout << line << "\n";
    std::cout << (lines.size() - failures) << "/" << lines.size() << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
