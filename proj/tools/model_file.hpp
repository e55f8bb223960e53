#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cdtree/core.hpp"
#include "cdtree/learner.hpp"

namespace cdtree::cli {

inline constexpr int kModelFormatVersion = 1;

// One applied split, by feature name so the summary survives column reordering.
struct TraceEntry {
    std::string feature;
    double threshold = 0.0;
    double total_bits_before = 0.0;
    double total_bits_after = 0.0;

    friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct TraceSummary {
    double initial_bits = 0.0;
    double final_bits = 0.0;
    std::vector<TraceEntry> steps;

    friend bool operator==(const TraceSummary&, const TraceSummary&) = default;
};

struct ModelFile {
    int format_version = kModelFormatVersion;
    CdTree tree;
    TraceSummary trace;
};

TraceSummary summarize(const CdTree& tree, const FitTrace& trace);

// Versioned JSON document. Splits reference features by name; the tree is
// encoded recursively.
std::string serialize_model(const ModelFile& model);
// Throws DataError on malformed documents or unsupported versions.
ModelFile deserialize_model(const std::string& text);

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace cdtree::cli
