#include "cdtree/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

namespace cdtree {

namespace {

// Raw cells of a CSV file, header separated.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            extra = 0;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return false;
        }
        for (std::size_t k = 1; k <= extra; ++k) {
            if (i + k >= s.size()) return false;
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += ch;
            }
        } else if (ch == '"' && trim(cell).empty()) {
            quoted = true;
            was_quoted = true;
            cell.clear();
        } else if (ch == ',') {
            cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
            cell.clear();
            was_quoted = false;
        } else {
            cell += ch;
        }
    }
    if (quoted) throw DataError("unterminated quote on line " + std::to_string(line_no));
    cells.emplace_back(was_quoted ? cell : std::string(trim(cell)));
    return cells;
}

RawTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (!valid_utf8(text)) throw DataError("'" + path.string() + "' is not valid UTF-8");

    RawTable table;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + start, end - start);
        ++line_no;
        start = end + 1;
        if (trim(line).empty()) {
            if (end == text.size()) break;
            continue;
        }
        auto cells = split_line(line, line_no);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError("line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
        if (end == text.size()) break;
    }
    if (table.header.empty()) throw DataError("'" + path.string() + "' has no header row");
    std::set<std::string> names;
    for (const auto& h : table.header) {
        if (h.empty()) throw DataError("empty column name in header");
        if (!names.insert(h).second) throw DataError("duplicate column '" + h + "' in header");
    }
    return table;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string cell_location(const RawTable& t, std::size_t row, std::size_t col) {
    // Data rows start on file line 2.
    return "column '" + t.header[col] + "', row " + std::to_string(row + 1);
}

void check_present(const RawTable& t, std::size_t col) {
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r][col].empty()) {
            throw DataError("missing value at " + cell_location(t, r, col));
        }
    }
}

double numeric_cell(const RawTable& t, std::size_t row, std::size_t col) {
    const auto& s = t.rows[row][col];
    if (s.empty()) throw DataError("missing value at " + cell_location(t, row, col));
    auto v = parse_number(s);
    if (!v) throw DataError("non-numeric value '" + s + "' at " + cell_location(t, row, col));
    return *v;
}

std::size_t header_index(const RawTable& t, const std::string& name) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c] == name) return c;
    }
    throw DataError("column '" + name + "' not found in header");
}

// Adds N(0, sd) to continuous features and the target, row by row.
void apply_jitter(const Schema& schema, std::vector<double>& features, std::vector<double>& target,
                  double sd, std::uint64_t seed) {
    if (sd <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    const std::size_t m = schema.m();
    for (std::size_t i = 0; i < target.size(); ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (schema.column(j).kind == ColumnKind::Continuous) features[i * m + j] += noise(rng);
        }
        target[i] += noise(rng);
    }
}

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

DataFrame load_csv(const std::filesystem::path& path, const IngestConfig& config) {
    if (!(config.jitter_sd >= 0.0)) throw DataError("jitter_sd must be >= 0");
    const RawTable table = read_table(path);
    const std::size_t target_col = header_index(table, config.target_column);
    const std::size_t n = table.rows.size();

    std::vector<double> target(n);
    for (std::size_t r = 0; r < n; ++r) target[r] = numeric_cell(table, r, target_col);

    // Per output column: source index plus how to encode it.
    std::vector<Column> columns;
    std::vector<std::size_t> sources;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == target_col) continue;
        check_present(table, c);
        bool numeric = true;
        std::set<double> distinct;
        for (const auto& row : table.rows) {
            auto v = parse_number(row[c]);
            if (!v) {
                numeric = false;
                break;
            }
            distinct.insert(*v);
        }
        const std::string& name = table.header[c];
        if (numeric) {
            if (distinct.size() == 2) {
                columns.push_back({name, ColumnKind::Binary,
                                   NumericBinaryEncoding{*distinct.begin(), *distinct.rbegin()}});
            } else {
                columns.push_back({name, ColumnKind::Continuous, DirectEncoding{}});
            }
            sources.push_back(c);
            continue;
        }
        if (!config.one_hot) {
            throw DataError("column '" + name + "' is not numeric and one-hot encoding is off");
        }
        std::set<std::string> levels;
        for (const auto& row : table.rows) levels.insert(row[c]);
        for (const auto& level : levels) {
            columns.push_back({name + "=" + level, ColumnKind::Binary, OneHotEncoding{name, level}});
            sources.push_back(c);
        }
    }
    if (columns.empty()) throw DataError("no feature columns besides the target");

    Schema schema(std::move(columns), config.target_column);
    const std::size_t m = schema.m();
    std::vector<double> features(n * m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& col = schema.column(j);
        for (std::size_t r = 0; r < n; ++r) {
            const auto& cell = table.rows[r][sources[j]];
            double v = 0.0;
            if (const auto* nb = std::get_if<NumericBinaryEncoding>(&col.encoding)) {
                v = *parse_number(cell) == nb->high ? 1.0 : 0.0;
            } else if (const auto* oh = std::get_if<OneHotEncoding>(&col.encoding)) {
                v = cell == oh->level ? 1.0 : 0.0;
            } else {
                v = *parse_number(cell);
            }
            features[r * m + j] = v;
        }
    }
    apply_jitter(schema, features, target, config.jitter_sd, config.seed);
    return DataFrame(std::move(schema), std::move(features), std::move(target));
}

DataFrame load_csv_with_schema(const std::filesystem::path& path, const Schema& schema,
                               double jitter_sd, std::uint64_t seed) {
    const RawTable table = read_table(path);
    const std::size_t n = table.rows.size();
    const std::size_t target_col = header_index(table, schema.target_name());
    std::vector<double> target(n);
    for (std::size_t r = 0; r < n; ++r) target[r] = numeric_cell(table, r, target_col);

    const std::size_t m = schema.m();
    std::vector<double> features(n * m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& col = schema.column(j);
        const auto* oh = std::get_if<OneHotEncoding>(&col.encoding);
        const std::size_t src = header_index(table, oh ? oh->source : col.name);
        for (std::size_t r = 0; r < n; ++r) {
            double v = 0.0;
            if (oh) {
                const auto& cell = table.rows[r][src];
                if (cell.empty()) throw DataError("missing value at " + cell_location(table, r, src));
                v = cell == oh->level ? 1.0 : 0.0;
            } else if (const auto* nb = std::get_if<NumericBinaryEncoding>(&col.encoding)) {
                const double raw = numeric_cell(table, r, src);
                if (raw == nb->high) {
                    v = 1.0;
                } else if (raw == nb->low) {
                    v = 0.0;
                } else {
                    throw DataError("value '" + table.rows[r][src] + "' at " +
                                    cell_location(table, r, src) + " is not one of the two levels");
                }
            } else {
                v = numeric_cell(table, r, src);
            }
            features[r * m + j] = v;
        }
    }
    apply_jitter(schema, features, target, jitter_sd, seed);
    return DataFrame(schema, std::move(features), std::move(target));
}

std::string to_csv(const DataFrame& frame) {
    std::string out;
    const auto& schema = frame.schema();
    for (const auto& col : schema.columns()) out += col.name + ",";
    out += schema.target_name() + "\n";
    for (std::size_t i = 0; i < frame.n(); ++i) {
        for (std::size_t j = 0; j < frame.m(); ++j) out += shortest(frame.at(i, j)) + ",";
        out += shortest(frame.target(i)) + "\n";
    }
    return out;
}

void write_csv(const DataFrame& frame, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << to_csv(frame);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<Fold> kfold(const DataFrame& frame, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw DataError("kfold needs at least 2 folds");
    if (folds > frame.n()) {
        throw DataError("cannot make " + std::to_string(folds) + " folds from " +
                        std::to_string(frame.n()) + " rows");
    }
    std::vector<std::size_t> order(frame.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Fold> out;
    const std::size_t base = frame.n() / folds;
    const std::size_t extra = frame.n() % folds;
    std::size_t start = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(start + size));
        std::vector<std::size_t> train;
        train.reserve(frame.n() - size);
        train.insert(train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(start));
        train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(start + size),
                     order.end());
        out.push_back(Fold{frame.take(train), frame.take(test), std::move(test)});
        start += size;
    }
    return out;
}

NoisyFrame inject_noise_features(const DataFrame& frame, const NoiseSpec& spec) {
    if (spec.w < 1) throw DataError("noise spec needs w >= 1");
    const std::size_t n = frame.n();
    const std::size_t m = frame.m();
    std::mt19937_64 rng(spec.seed);

    std::vector<std::vector<double>> added(spec.w);
    if (spec.mode == NoiseMode::Independent) {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& col : added) {
            col.resize(n);
            for (double& v : col) v = normal(rng);
        }
    } else {
        std::vector<std::size_t> eligible;
        std::vector<double> sds(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            sds[j] = sample_sd(frame.column_values(j));
            if (sds[j] > 0.0) eligible.push_back(j);
        }
        if (eligible.empty()) {
            throw DataError("dependent noise needs a feature column with positive standard deviation");
        }
        // Draw sources without replacement; when w exceeds the eligible
        // columns, start a fresh permutation for the remainder.
        std::vector<std::size_t> chosen;
        while (chosen.size() < spec.w) {
            auto perm = eligible;
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t j : perm) {
                if (chosen.size() == spec.w) break;
                chosen.push_back(j);
            }
        }
        for (std::size_t k = 0; k < spec.w; ++k) {
            const std::size_t src = chosen[k];
            std::normal_distribution<double> normal(0.0, sds[src] / 2.0);
            added[k].resize(n);
            for (std::size_t i = 0; i < n; ++i) added[k][i] = frame.at(i, src) + normal(rng);
        }
    }

    std::vector<Column> columns = frame.schema().columns();
    std::vector<std::string> names;
    for (std::size_t k = 0; k < spec.w; ++k) {
        std::string name = "noise_" + std::to_string(k + 1);
        if (frame.schema().contains(name) || name == frame.schema().target_name()) {
            throw DataError("frame already has a column named '" + name + "'");
        }
        columns.push_back({name, ColumnKind::Continuous, DirectEncoding{}});
        names.push_back(std::move(name));
    }
    const std::size_t m2 = m + spec.w;
    std::vector<double> features(n * m2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = frame.row(i);
        std::copy(row.begin(), row.end(), features.begin() + static_cast<std::ptrdiff_t>(i * m2));
        for (std::size_t k = 0; k < spec.w; ++k) features[i * m2 + m + k] = added[k][i];
    }
    Schema schema(std::move(columns), frame.schema().target_name());
    return NoisyFrame{DataFrame(std::move(schema), std::move(features), frame.targets()),
                      std::move(names)};
}

DataFrame make_step_dataset(std::size_t n, std::size_t m_noise, std::uint64_t seed) {
    if (n < 1) throw DataError("step dataset needs n >= 1");
    std::vector<Column> columns{{"x1", ColumnKind::Continuous, DirectEncoding{}}};
    for (std::size_t k = 1; k <= m_noise; ++k) {
        columns.push_back({"z" + std::to_string(k), ColumnKind::Continuous, DirectEncoding{}});
    }
    const std::size_t m = columns.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> features(n * m);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = unit(rng);
        const double u = unit(rng);
        features[i * m] = x;
        target[i] = x <= 0.5 ? 0.5 * u : 0.5 + 0.5 * u;
        for (std::size_t k = 1; k < m; ++k) features[i * m + k] = normal(rng);
    }
    return DataFrame(Schema(std::move(columns), "y"), std::move(features), std::move(target));
}

DataFrame make_null_dataset(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n < 1 || m < 1) throw DataError("null dataset needs n >= 1 and m >= 1");
    std::vector<Column> columns;
    for (std::size_t k = 1; k <= m; ++k) {
        columns.push_back({"x" + std::to_string(k), ColumnKind::Continuous, DirectEncoding{}});
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> features(n * m);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < m; ++k) features[i * m + k] = unit(rng);
        target[i] = normal(rng);
    }
    return DataFrame(Schema(std::move(columns), "y"), std::move(features), std::move(target));
}

}  // namespace cdtree
