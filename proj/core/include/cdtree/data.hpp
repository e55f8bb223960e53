#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cdtree/core.hpp"

namespace cdtree {

struct IngestConfig {
    std::string target_column;
    double jitter_sd = 1e-3;  // 0 disables jitter
    bool one_hot = true;
    std::uint64_t seed = 0;
};

// Reads a comma-separated file with a header row. Numeric columns with
// exactly two distinct values become binary (lower value -> 0), other
// numeric columns continuous, text columns one-hot indicators named
// "col=level". Jitter adds N(0, jitter_sd) noise to continuous features and
// the target. Throws DataError on I/O problems, missing cells, non-numeric
// targets, or invalid UTF-8.
DataFrame load_csv(const std::filesystem::path& path, const IngestConfig& config);

// Reads a file against a known schema, resolving columns by name so column
// order in the file does not matter. Used to apply a saved model to new data.
DataFrame load_csv_with_schema(const std::filesystem::path& path, const Schema& schema,
                               double jitter_sd = 0.0, std::uint64_t seed = 0);

// Writes feature columns then the target, values in shortest round-trip form.
void write_csv(const DataFrame& frame, const std::filesystem::path& path);
std::string to_csv(const DataFrame& frame);

struct Fold {
    DataFrame train;
    DataFrame test;
    std::vector<std::size_t> test_rows;  // indices into the source frame
};

// Seeded shuffle, then contiguous folds; the first n % folds folds get one extra row.
std::vector<Fold> kfold(const DataFrame& frame, std::size_t folds, std::uint64_t seed);

enum class NoiseMode { Independent, Dependent };

struct NoiseSpec {
    NoiseMode mode = NoiseMode::Independent;
    std::size_t w = 1;
    std::uint64_t seed = 0;
};

struct NoisyFrame {
    DataFrame frame;
    std::vector<std::string> injected;  // names of the appended columns
};

// Appends w irrelevant continuous columns named noise_1..noise_w.
// Independent: standard normal draws. Dependent: X_j + N(0, s(X_j)/2) for
// randomly chosen source columns with positive sample sd.
NoisyFrame inject_noise_features(const DataFrame& frame, const NoiseSpec& spec);

// x1 ~ U(0,1); y ~ U(0, 0.5) when x1 <= 0.5, else U(0.5, 1); plus m_noise
// standard normal columns z1..z{m_noise}.
DataFrame make_step_dataset(std::size_t n, std::size_t m_noise, std::uint64_t seed);

// m uniform features x1..xm and a standard normal target independent of them.
DataFrame make_null_dataset(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace cdtree
