#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cdtree/data.hpp"
#include "cdtree/eval.hpp"
#include "cdtree/inference.hpp"
#include "cdtree/learner.hpp"
#include "model_file.hpp"

namespace cdtree::cli {

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + path + "'");
}

// Runs a computation step, reclassifying input errors raised inside it as
// computation failures (exit code 2).
template <typename F>
auto compute(F&& f) {
    try {
        return f();
    } catch (const DataError& e) {
        throw ComputeError(e.what());
    }
}

struct FitFlags {
    std::uint32_t c = 5;
    std::uint32_t g = 30;
    double jitter_sd = 1e-3;
    double boundary_pad = 1e-3;
    std::uint32_t min_leaf = 1;
    std::uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--c", c, "Quantile-count base C (candidates per level: C*2^(d-1))")
            ->capture_default_str();
        cmd->add_option("--g", g, "Step size of the coarse histogram bin search")
            ->capture_default_str();
        cmd->add_option("--jitter-sd", jitter_sd,
                        "Std. dev. of Gaussian jitter added to continuous columns (0 disables)")
            ->capture_default_str();
        cmd->add_option("--boundary-pad", boundary_pad,
                        "Padding added beyond the training target range")
            ->capture_default_str();
        cmd->add_option("--min-leaf", min_leaf, "Minimum rows per leaf")->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for jitter, folds and noise")->capture_default_str();
    }

    FitConfig config() const {
        FitConfig cfg;
        cfg.c = c;
        cfg.g = g;
        cfg.boundary_pad = boundary_pad;
        cfg.min_leaf = min_leaf;
        cfg.seed = seed;
        cfg.check();
        if (!(jitter_sd >= 0.0)) throw DataError("jitter-sd must be >= 0");
        return cfg;
    }

    IngestConfig ingest(const std::string& target) const {
        IngestConfig ic;
        ic.target_column = target;
        ic.jitter_sd = jitter_sd;
        ic.seed = seed;
        return ic;
    }
};

void print_score(std::ostream& out, const MdlScore& s) {
    out << "total_bits=" << num(s.total_bits) << "\n"
        << "data_nll_bits=" << num(s.data_nll_bits) << "\n"
        << "regret_bits=" << num(s.regret_bits) << "\n"
        << "structure_bits=" << num(s.structure_bits) << "\n"
        << "split_bits=" << num(s.split_bits) << "\n"
        << "bin_count_bits=" << num(s.bin_count_bits) << "\n";
}

void print_eval(std::ostream& out, const EvalReport& r) {
    out << "n_test=" << r.n_test << "\n"
        << "mean_nll_nats=" << num(r.mean_nll_nats) << "\n"
        << "zero_density_events=" << r.zero_density_events << "\n"
        << "clamp_floor_nats=" << num(r.clamp_floor_nats) << "\n";
}

std::vector<double> parse_row(const std::string& text, std::size_t m) {
    std::vector<double> x;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        while (first < last && *first == ' ') ++first;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) throw DataError("--x value '" + cell + "' is not a number");
        x.push_back(v);
    }
    if (x.size() != m) {
        throw DataError("--x has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(m));
    }
    return x;
}

}  // namespace

std::string export_text(const CdTree& tree) {
    std::string out;
    for (const auto& rule : leaf_rules(tree)) out += rule.render() + "\n";
    return out;
}

std::string export_dot(const CdTree& tree) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '\\';
            q += ch;
        }
        return q + "\"";
    };
    std::string out = "digraph cdtree {\n  node [shape=box, fontname=\"Helvetica\"];\n";
    std::vector<NodeId> stack{CdTree::root()};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const auto& node = tree.node(id);
        std::string label;
        if (node.is_leaf()) {
            label = "n=" + std::to_string(node.hist.n) + ", h=" + std::to_string(node.hist.h) +
                    "\\ncounts:";
            for (auto c : node.hist.counts) label += " " + std::to_string(c);
            out += "  n" + std::to_string(id) + " [label=" + quote(label) +
                   ", style=rounded];\n";
            continue;
        }
        const auto& split = *node.split;
        const auto& name = tree.schema().column(split.feature).name;
        label = split.is_binary() ? name + " = 0" : name + " <= " + num(split.threshold());
        out += "  n" + std::to_string(id) + " [label=" + quote(label) + "];\n";
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.left) +
               " [label=\"yes\"];\n";
        out += "  n" + std::to_string(id) + " -> n" + std::to_string(node.right) +
               " [label=\"no\"];\n";
        stack.push_back(node.right);
        stack.push_back(node.left);
    }
    out += "}\n";
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conditional density trees: MDL-selected decision trees with histogram leaves",
                 "cdtree"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cdtree 0.1.0");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Learn a tree from a CSV file and save the model");
    std::string train_path, target, model_out;
    FitFlags fit_flags;
    fit_cmd->add_option("--train", train_path, "Training CSV")->required();
    fit_cmd->add_option("--target", target, "Target column name")->required();
    fit_cmd->add_option("--out", model_out, "Model file to write")->required();
    fit_flags.add_to(fit_cmd);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Mean test negative log-likelihood (nats)");
    std::string model_path, data_path;
    double floor_nats = kDefaultClampFloorNats;
    double eval_jitter = 0.0;
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--model", model_path, "Model file")->required();
    eval_cmd->add_option("--data", data_path, "Test CSV")->required();
    eval_cmd->add_option("--floor-nats", floor_nats, "Log density used for zero-density events")
        ->capture_default_str();
    eval_cmd->add_option("--jitter-sd", eval_jitter, "Jitter applied to the test data")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_seed, "Jitter seed")->capture_default_str();

    // cv
    auto* cv_cmd = app.add_subcommand("cv", "K-fold cross-validation");
    std::string cv_data, cv_target;
    std::size_t folds = 5;
    FitFlags cv_flags;
    double cv_floor = kDefaultClampFloorNats;
    cv_cmd->add_option("--data", cv_data, "CSV file")->required();
    cv_cmd->add_option("--target", cv_target, "Target column name")->required();
    cv_cmd->add_option("--folds", folds, "Number of folds")->capture_default_str();
    cv_cmd->add_option("--floor-nats", cv_floor, "Log density used for zero-density events")
        ->capture_default_str();
    cv_flags.add_to(cv_cmd);

    // predict
    auto* pred_cmd = app.add_subcommand("predict", "Write ln f(y|x) for every row");
    std::string pred_model, pred_data, pred_out;
    pred_cmd->add_option("--model", pred_model, "Model file")->required();
    pred_cmd->add_option("--data", pred_data, "CSV with features and target")->required();
    pred_cmd->add_option("--out", pred_out, "Output CSV")->required();

    // density
    auto* dens_cmd = app.add_subcommand("density", "Conditional density curve for one row");
    std::string dens_model, dens_data, dens_x, dens_out;
    std::size_t dens_row = 0;
    std::size_t points = 200;
    dens_cmd->add_option("--model", dens_model, "Model file")->required();
    auto* row_opt = dens_cmd->add_option("--row", dens_row, "Row index into --data");
    auto* x_opt = dens_cmd->add_option("--x", dens_x, "Encoded feature values, comma separated");
    row_opt->excludes(x_opt);
    dens_cmd->add_option("--data", dens_data, "CSV used with --row");
    dens_cmd->add_option("--points", points, "Number of grid points")->capture_default_str();
    dens_cmd->add_option("--out", dens_out, "Output CSV")->required();

    // export
    auto* exp_cmd = app.add_subcommand("export", "Print the tree as rules, dot or JSON");
    std::string exp_model, exp_format = "text", exp_out;
    exp_cmd->add_option("--model", exp_model, "Model file")->required();
    exp_cmd->add_option("--format", exp_format, "text|dot|json")
        ->check(CLI::IsMember({"text", "dot", "json"}))
        ->capture_default_str();
    exp_cmd->add_option("--out", exp_out, "Write to file instead of stdout");

    // robustness
    auto* rob_cmd = app.add_subcommand("robustness", "Irrelevant-feature robustness experiment");
    std::string rob_data, rob_target, rob_mode = "independent";
    std::vector<std::size_t> ws{3, 5, 10, 20};
    std::size_t seeds = 10;
    FitFlags rob_flags;
    rob_cmd->add_option("--data", rob_data, "CSV file")->required();
    rob_cmd->add_option("--target", rob_target, "Target column name")->required();
    rob_cmd->add_option("--mode", rob_mode, "independent|dependent")
        ->check(CLI::IsMember({"independent", "dependent"}))
        ->capture_default_str();
    rob_cmd->add_option("--w", ws, "Numbers of injected features")->delimiter(',');
    rob_cmd->add_option("--seeds", seeds, "Repetitions per w")->capture_default_str();
    rob_flags.add_to(rob_cmd);

    // synth
    auto* syn_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::string syn_kind = "step", syn_out;
    std::size_t syn_n = 2000, syn_noise = 0;
    std::uint64_t syn_seed = 0;
    syn_cmd->add_option("kind", syn_kind, "step|null")
        ->check(CLI::IsMember({"step", "null"}))
        ->capture_default_str();
    syn_cmd->add_option("--n", syn_n, "Rows")->capture_default_str();
    syn_cmd->add_option("--noise", syn_noise,
                        "step: extra N(0,1) columns; null: number of features (0 means 5)")
        ->capture_default_str();
    syn_cmd->add_option("--seed", syn_seed, "Generator seed")->capture_default_str();
    syn_cmd->add_option("--out", syn_out, "Output CSV")->required();

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << "cdtree 0.1.0\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (fit_cmd->parsed()) {
            const FitConfig cfg = fit_flags.config();
            const DataFrame frame = load_csv(train_path, fit_flags.ingest(target));
            const auto result = compute([&] { return fit(frame, cfg); });
            const auto score = compute([&] { return total_mdl_score(result.tree, frame); });
            save_model(ModelFile{kModelFormatVersion, result.tree, summarize(result.tree, result.trace)},
                       model_out);
            out << "leaves=" << result.tree.leaf_count() << "\n"
                << "iterations=" << result.trace.steps.size() << "\n";
            print_score(out, score);
        } else if (eval_cmd->parsed()) {
            const auto model = load_model(model_path);
            const DataFrame test =
                load_csv_with_schema(data_path, model.tree.schema(), eval_jitter, eval_seed);
            print_eval(out, compute([&] { return evaluate_nll(model.tree, test, floor_nats); }));
        } else if (cv_cmd->parsed()) {
            const FitConfig cfg = cv_flags.config();
            const DataFrame frame = load_csv(cv_data, cv_flags.ingest(cv_target));
            if (folds < 2 || folds > frame.n()) {
                throw DataError("--folds must be between 2 and the number of rows");
            }
            const auto report =
                compute([&] { return cross_validate(frame, folds, cfg, cv_flags.seed, cv_floor); });
            out << "fold,n_test,mean_nll_nats,zero_density_events,leaves\n";
            for (std::size_t f = 0; f < report.folds.size(); ++f) {
                const auto& r = report.folds[f];
                out << f + 1 << "," << r.n_test << "," << num(r.mean_nll_nats) << ","
                    << r.zero_density_events << "," << report.leaf_counts[f] << "\n";
            }
            out << "\nmean_nll_nats,sd_nll_nats,mean_leaves\n"
                << num(report.mean_nll_nats) << "," << num(report.sd_nll_nats) << ","
                << num(report.mean_leaves) << "\n";
        } else if (pred_cmd->parsed()) {
            const auto model = load_model(pred_model);
            const DataFrame data = load_csv_with_schema(pred_data, model.tree.schema());
            std::string csv = "row,log_density\n";
            compute([&] {
                for (std::size_t i = 0; i < data.n(); ++i) {
                    csv += std::to_string(i) + "," +
                           num(log_density(model.tree, data.row(i), data.target(i))) + "\n";
                }
                return 0;
            });
            write_text(pred_out, csv);
        } else if (dens_cmd->parsed()) {
            const auto model = load_model(dens_model);
            std::vector<double> x;
            if (!dens_x.empty()) {
                x = parse_row(dens_x, model.tree.schema().m());
            } else if (row_opt->count() > 0) {
                if (dens_data.empty()) throw DataError("--row needs --data");
                const DataFrame data = load_csv_with_schema(dens_data, model.tree.schema());
                if (dens_row >= data.n()) throw DataError("--row is out of range");
                const auto r = data.row(dens_row);
                x.assign(r.begin(), r.end());
            } else {
                throw DataError("density needs --row or --x");
            }
            const auto grid = density_grid(model.tree, x, points);
            std::string csv = "y,density\n";
            for (const auto& [y, d] : grid) csv += num(y) + "," + num(d) + "\n";
            write_text(dens_out, csv);
        } else if (exp_cmd->parsed()) {
            const auto model = load_model(exp_model);
            std::string text;
            if (exp_format == "text") {
                text = export_text(model.tree);
            } else if (exp_format == "dot") {
                text = export_dot(model.tree);
            } else {
                text = serialize_model(model);
            }
            if (exp_out.empty()) {
                out << text;
            } else {
                write_text(exp_out, text);
            }
        } else if (rob_cmd->parsed()) {
            const FitConfig cfg = rob_flags.config();
            const DataFrame frame = load_csv(rob_data, rob_flags.ingest(rob_target));
            if (frame.n() < 5) throw DataError("robustness needs at least 5 rows");
            const NoiseMode mode =
                rob_mode == "dependent" ? NoiseMode::Dependent : NoiseMode::Independent;
            out << "mode,w,seed,irrelevant_splits,leaves,nll_base,nll_noisy,nll_delta\n";
            for (std::size_t s = 0; s < seeds; ++s) {
                const std::uint64_t seed = rob_flags.seed + s;
                const auto split = kfold(frame, 5, seed);
                const auto& holdout = split.front().test_rows;
                std::set<std::size_t> held(holdout.begin(), holdout.end());
                std::vector<std::size_t> train_rows;
                for (std::size_t i = 0; i < frame.n(); ++i) {
                    if (held.count(i) == 0) train_rows.push_back(i);
                }
                const auto base = compute([&] { return fit(frame.take(train_rows), cfg); });
                const double nll_base =
                    evaluate_nll(base.tree, frame.take(holdout)).mean_nll_nats;
                for (std::size_t w : ws) {
                    const auto noisy = inject_noise_features(frame, NoiseSpec{mode, w, seed});
                    const auto res =
                        compute([&] { return fit(noisy.frame.take(train_rows), cfg); });
                    const double nll =
                        evaluate_nll(res.tree, noisy.frame.take(holdout)).mean_nll_nats;
                    const std::set<std::string> names(noisy.injected.begin(), noisy.injected.end());
                    out << rob_mode << "," << w << "," << seed << ","
                        << count_irrelevant_splits(res.tree, names) << "," << res.tree.leaf_count()
                        << "," << num(nll_base) << "," << num(nll) << "," << num(nll - nll_base)
                        << "\n";
                }
            }
        } else if (syn_cmd->parsed()) {
            const DataFrame frame = syn_kind == "step"
                                        ? make_step_dataset(syn_n, syn_noise, syn_seed)
                                        : make_null_dataset(syn_n, syn_noise == 0 ? 5 : syn_noise, syn_seed);
            write_csv(frame, syn_out);
        }
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ComputeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCompute;
    }
    return kExitOk;
}

}  // namespace cdtree::cli
