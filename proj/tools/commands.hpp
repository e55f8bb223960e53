#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cdtree/core.hpp"

namespace cdtree::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;    // I/O, ingestion, flag validation
inline constexpr int kExitCompute = 2;  // fitting or evaluation failed

// Entry point shared by the executable and the tests. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One line per leaf rule.
std::string export_text(const CdTree& tree);
// Graphviz digraph; internal nodes show the split, leaves n/h and counts.
std::string export_dot(const CdTree& tree);

}  // namespace cdtree::cli
