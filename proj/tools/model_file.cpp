#include "model_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cdtree::cli {

using nlohmann::json;

namespace {

json encode_column(const Column& col) {
    json j;
    j["name"] = col.name;
    j["kind"] = col.kind == ColumnKind::Binary ? "binary" : "continuous";
    if (const auto* nb = std::get_if<NumericBinaryEncoding>(&col.encoding)) {
        j["encoding"] = {{"type", "numeric_binary"}, {"low", nb->low}, {"high", nb->high}};
    } else if (const auto* oh = std::get_if<OneHotEncoding>(&col.encoding)) {
        j["encoding"] = {{"type", "one_hot"}, {"source", oh->source}, {"level", oh->level}};
    } else {
        j["encoding"] = {{"type", "direct"}};
    }
    return j;
}

Column decode_column(const json& j) {
    Column col;
    col.name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "binary") {
        col.kind = ColumnKind::Binary;
    } else if (kind == "continuous") {
        col.kind = ColumnKind::Continuous;
    } else {
        throw DataError("unknown column kind '" + kind + "'");
    }
    const auto& enc = j.at("encoding");
    const auto type = enc.at("type").get<std::string>();
    if (type == "numeric_binary") {
        col.encoding = NumericBinaryEncoding{enc.at("low").get<double>(), enc.at("high").get<double>()};
    } else if (type == "one_hot") {
        col.encoding =
            OneHotEncoding{enc.at("source").get<std::string>(), enc.at("level").get<std::string>()};
    } else if (type == "direct") {
        col.encoding = DirectEncoding{};
    } else {
        throw DataError("unknown column encoding '" + type + "'");
    }
    return col;
}

json encode_node(const CdTree& tree, NodeId id) {
    const auto& node = tree.node(id);
    if (node.is_leaf()) {
        return json{{"leaf", {{"h", node.hist.h}, {"n", node.hist.n}, {"counts", node.hist.counts}}}};
    }
    const auto& split = *node.split;
    json s;
    s["feature"] = tree.schema().column(split.feature).name;
    if (const auto* c = std::get_if<ContinuousSplit>(&split.kind)) {
        s["kind"] = "continuous";
        s["threshold"] = c->threshold;
        s["granularity"] = c->granularity;
    } else {
        s["kind"] = "binary";
    }
    return json{{"split", s},
                {"left", encode_node(tree, node.left)},
                {"right", encode_node(tree, node.right)}};
}

// Appends the subtree in preorder and returns its root id.
NodeId decode_node(const json& j, const Schema& schema, const Bounds& bounds,
                   std::vector<TreeNode>& nodes, int depth) {
    if (depth > 10000) throw DataError("model tree is too deep");
    const NodeId id = nodes.size();
    nodes.emplace_back();
    if (j.contains("leaf")) {
        const auto& leaf = j.at("leaf");
        FittedHistogram hist;
        hist.bounds = bounds;
        hist.h = leaf.at("h").get<std::size_t>();
        hist.n = leaf.at("n").get<std::uint64_t>();
        hist.counts = leaf.at("counts").get<std::vector<std::uint64_t>>();
        nodes[id].hist = std::move(hist);
        return id;
    }
    const auto& s = j.at("split");
    SplitCondition cond;
    cond.feature = schema.index_of(s.at("feature").get<std::string>());
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "continuous") {
        cond.kind = ContinuousSplit{s.at("threshold").get<double>(),
                                    s.at("granularity").get<std::uint32_t>()};
    } else if (kind == "binary") {
        cond.kind = BinarySplit{};
    } else {
        throw DataError("unknown split kind '" + kind + "'");
    }
    nodes[id].split = cond;
    nodes[id].hist = FittedHistogram{bounds, 1, {0}, 0};
    const NodeId left = decode_node(j.at("left"), schema, bounds, nodes, depth + 1);
    const NodeId right = decode_node(j.at("right"), schema, bounds, nodes, depth + 1);
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
}

}  // namespace

TraceSummary summarize(const CdTree& tree, const FitTrace& trace) {
    TraceSummary out;
    out.initial_bits = trace.initial_bits;
    out.final_bits = trace.final_bits();
    for (const auto& step : trace.steps) {
        out.steps.push_back({tree.schema().column(step.condition.feature).name,
                             step.condition.threshold(), step.total_bits_before,
                             step.total_bits_after});
    }
    return out;
}

std::string serialize_model(const ModelFile& model) {
    const CdTree& tree = model.tree;
    json doc;
    doc["format"] = "cdtree-model";
    doc["format_version"] = model.format_version;
    json columns = json::array();
    for (const auto& col : tree.schema().columns()) columns.push_back(encode_column(col));
    doc["schema"] = {{"target", tree.schema().target_name()}, {"columns", columns}};
    doc["bounds"] = {{"lower", tree.bounds().lower}, {"upper", tree.bounds().upper}};
    const auto& cfg = tree.config();
    doc["config"] = {{"c", cfg.c},
                     {"g", cfg.g},
                     {"boundary_pad", cfg.boundary_pad},
                     {"min_leaf", cfg.min_leaf},
                     {"seed", cfg.seed}};
    doc["tree"] = encode_node(tree, CdTree::root());
    json steps = json::array();
    for (const auto& s : model.trace.steps) {
        steps.push_back({{"feature", s.feature},
                         {"threshold", s.threshold},
                         {"total_bits_before", s.total_bits_before},
                         {"total_bits_after", s.total_bits_after}});
    }
    doc["trace"] = {{"initial_bits", model.trace.initial_bits},
                    {"final_bits", model.trace.final_bits},
                    {"steps", steps}};
    return doc.dump(2) + "\n";
}

ModelFile deserialize_model(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.value("format", std::string{}) != "cdtree-model") {
            throw DataError("not a cdtree model document");
        }
        ModelFile model;
        model.format_version = doc.at("format_version").get<int>();
        if (model.format_version != kModelFormatVersion) {
            throw DataError("unsupported model format version " +
                            std::to_string(model.format_version));
        }
        std::vector<Column> columns;
        for (const auto& c : doc.at("schema").at("columns")) columns.push_back(decode_column(c));
        Schema schema(std::move(columns), doc.at("schema").at("target").get<std::string>());
        const Bounds bounds(doc.at("bounds").at("lower").get<double>(),
                            doc.at("bounds").at("upper").get<double>());
        FitConfig cfg;
        const auto& c = doc.at("config");
        cfg.c = c.at("c").get<std::uint32_t>();
        cfg.g = c.at("g").get<std::uint32_t>();
        cfg.boundary_pad = c.at("boundary_pad").get<double>();
        cfg.min_leaf = c.at("min_leaf").get<std::uint32_t>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        cfg.check();

        std::vector<TreeNode> nodes;
        decode_node(doc.at("tree"), schema, bounds, nodes, 0);
        model.tree = CdTree(std::move(schema), bounds, cfg, std::move(nodes));

        const auto& t = doc.at("trace");
        model.trace.initial_bits = t.at("initial_bits").get<double>();
        model.trace.final_bits = t.at("final_bits").get<double>();
        for (const auto& s : t.at("steps")) {
            model.trace.steps.push_back({s.at("feature").get<std::string>(),
                                         s.at("threshold").get<double>(),
                                         s.at("total_bits_before").get<double>(),
                                         s.at("total_bits_after").get<double>()});
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << serialize_model(model);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace cdtree::cli
