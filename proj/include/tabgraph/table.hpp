#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabgraph/csv.hpp"
#include "tabgraph/rng.hpp"

#include <nlohmann/json.hpp>

namespace tabgraph {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    int cardinality = 0;               // ≥ 2 when categorical
    std::vector<std::string> labels;   // categorical code -> raw label, lexicographic
    int index = 0;                     // position in the encoded table

    nlohmann::json to_json() const {
        nlohmann::json j{{"name", name},
                         {"kind", kind == ColumnKind::Numeric ? "numeric" : "categorical"},
                         {"index", index}};
        if (kind == ColumnKind::Categorical) {
            j["cardinality"] = cardinality;
            j["labels"] = labels;
        }
        return j;
    }
};

/// Fully numeric view of a table: categoricals as integer codes, no missing
/// values, no zero-variance columns.
struct EncodedTable {
    std::vector<ColumnSpec> specs;
    std::vector<double> values;  // row-major, n_rows x specs.size()
    std::size_t n_rows = 0;

    std::size_t n_cols() const { return specs.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * specs.size() + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * specs.size(), specs.size()};
    }
    std::vector<double> column(std::size_t c) const {
        std::vector<double> col(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) col[r] = at(r, c);
        return col;
    }
};

/// Diagnostic record; serialized as a JSON line on the diagnostics stream.
struct Warning {
    std::string code;
    nlohmann::json detail;
    nlohmann::json to_json() const { return nlohmann::json{{"warning", code}, {"detail", detail}}; }
};

enum class MissingPolicy { DropRow, Error };

struct EncodeOptions {
    int categorical_max_cardinality = 32;
    MissingPolicy missing = MissingPolicy::DropRow;
};

struct EncodeResult {
    EncodedTable table;
    std::vector<Warning> warnings;
};

/// Column typing and integer coding. A column becomes categorical when any
/// cell fails to parse as a number or when it takes at most
/// `categorical_max_cardinality` distinct values; codes follow the
/// lexicographic order of the raw labels. Zero-variance columns are dropped
/// with a warning; missing (empty) cells follow the chosen policy.
inline EncodeResult encode(const RawTable& raw, EncodeOptions opts = {}) {
    if (raw.rows.empty() || raw.names.empty()) throw std::invalid_argument("encode: empty table");

    const std::size_t n_cols_in = raw.n_cols();
    EncodeResult result;

    // Missing-value pass.
    std::vector<std::size_t> kept_rows;
    kept_rows.reserve(raw.rows.size());
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        bool missing = false;
        for (std::size_t c = 0; c < n_cols_in; ++c) {
            if (raw.rows[r][c].empty()) {
                if (opts.missing == MissingPolicy::Error) {
                    throw std::runtime_error("encode: missing value at row " + std::to_string(r) +
                                             ", column '" + raw.names[c] + "'");
                }
                missing = true;
                break;
            }
        }
        if (missing) {
            result.warnings.push_back({"row_dropped", {{"row", r}}});
        } else {
            kept_rows.push_back(r);
        }
    }
    if (kept_rows.empty()) throw std::runtime_error("encode: all rows dropped as incomplete");

    struct ColumnPlan {
        ColumnKind kind;
        std::vector<std::string> labels;
        std::map<std::string, int, std::less<>> code_of;
    };
    std::vector<ColumnPlan> plans(n_cols_in);
    std::vector<bool> degenerate(n_cols_in, false);

    for (std::size_t c = 0; c < n_cols_in; ++c) {
        bool all_numeric = true;
        std::set<std::string> distinct;
        double first_value = 0;
        bool constant_numeric = true;
        bool first = true;
        for (std::size_t r : kept_rows) {
            const std::string& cell = raw.rows[r][c];
            distinct.insert(cell);
            double v;
            if (!parse_double(cell, v)) {
                all_numeric = false;
            } else if (first) {
                first_value = v;
                first = false;
            } else if (v != first_value) {
                constant_numeric = false;
            }
        }
        const bool categorical =
            !all_numeric || int(distinct.size()) <= opts.categorical_max_cardinality;
        if (distinct.size() < 2 || (all_numeric && constant_numeric && !categorical)) {
            degenerate[c] = true;
            result.warnings.push_back({"zero_variance_column", {{"column", raw.names[c]}}});
            continue;
        }
        ColumnPlan& plan = plans[c];
        plan.kind = categorical ? ColumnKind::Categorical : ColumnKind::Numeric;
        if (categorical) {
            plan.labels.assign(distinct.begin(), distinct.end());  // std::set: lexicographic
            for (std::size_t i = 0; i < plan.labels.size(); ++i)
                plan.code_of[plan.labels[i]] = int(i);
        }
    }

    std::vector<std::size_t> kept_cols;
    for (std::size_t c = 0; c < n_cols_in; ++c)
        if (!degenerate[c]) kept_cols.push_back(c);
    if (kept_cols.empty()) throw std::runtime_error("encode: every column is degenerate");

    EncodedTable& table = result.table;
    table.n_rows = kept_rows.size();
    table.specs.reserve(kept_cols.size());
    for (std::size_t out = 0; out < kept_cols.size(); ++out) {
        const std::size_t c = kept_cols[out];
        ColumnSpec spec;
        spec.name = raw.names[c];
        spec.kind = plans[c].kind;
        spec.index = int(out);
        if (spec.kind == ColumnKind::Categorical) {
            spec.cardinality = int(plans[c].labels.size());
            spec.labels = plans[c].labels;
        }
        table.specs.push_back(std::move(spec));
    }
    table.values.resize(table.n_rows * kept_cols.size());
    for (std::size_t out_r = 0; out_r < kept_rows.size(); ++out_r) {
        const std::size_t r = kept_rows[out_r];
        for (std::size_t out_c = 0; out_c < kept_cols.size(); ++out_c) {
            const std::size_t c = kept_cols[out_c];
            const std::string& cell = raw.rows[r][c];
            double v;
            if (plans[c].kind == ColumnKind::Categorical) {
                v = double(plans[c].code_of.find(cell)->second);
            } else {
                parse_double(cell, v);
            }
            table.values[out_r * kept_cols.size() + out_c] = v;
        }
    }
    return result;
}

struct SyntheticTable {
    EncodedTable table;
    std::vector<int> group_of_column;  // ground-truth dependency group per column
};

/// Planted dependency groups: every column in group g is
/// within_strength * z_g + noise_sd * independent noise, with z_g a fresh
/// standard normal per row. Columns across groups are independent.
inline SyntheticTable generate_synthetic_table(int n_groups, int cols_per_group, int n_rows,
                                               double within_strength, double noise_sd,
                                               std::uint64_t seed) {
    if (n_groups <= 0 || cols_per_group <= 0 || n_rows <= 0)
        throw std::invalid_argument("generate_synthetic_table: counts must be positive");
    if (!(within_strength > 0.0 && within_strength <= 1.0))
        throw std::invalid_argument("generate_synthetic_table: within_strength must be in (0,1]");
    if (noise_sd < 0.0)
        throw std::invalid_argument("generate_synthetic_table: noise_sd must be >= 0");

    SyntheticTable out;
    const int n_cols = n_groups * cols_per_group;
    out.table.n_rows = std::size_t(n_rows);
    out.table.values.resize(std::size_t(n_rows) * std::size_t(n_cols));
    out.group_of_column.resize(std::size_t(n_cols));
    for (int g = 0; g < n_groups; ++g) {
        for (int j = 0; j < cols_per_group; ++j) {
            const int c = g * cols_per_group + j;
            ColumnSpec spec;
            spec.name = "g" + std::to_string(g) + "_c" + std::to_string(j);
            spec.kind = ColumnKind::Numeric;
            spec.index = c;
            out.table.specs.push_back(std::move(spec));
            out.group_of_column[std::size_t(c)] = g;
        }
    }
    Rng rng(seed);
    for (int r = 0; r < n_rows; ++r) {
        for (int g = 0; g < n_groups; ++g) {
            const double z = rng.normal();
            for (int j = 0; j < cols_per_group; ++j) {
                const int c = g * cols_per_group + j;
                out.table.values[std::size_t(r) * std::size_t(n_cols) + std::size_t(c)] =
                    within_strength * z + noise_sd * rng.normal();
            }
        }
    }
    return out;
}

inline std::string table_to_csv(const EncodedTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (c) out += ',';
        out += csv_escape(table.specs[c].name);
    }
    out += '\n';
    for (std::size_t r = 0; r < table.n_rows; ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            if (c) out += ',';
            const double v = table.at(r, c);
            if (table.specs[c].kind == ColumnKind::Categorical)
                out += csv_escape(table.specs[c].labels[std::size_t(v)]);
            else
                out += fmt_double(v);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json table_manifest(const EncodeResult& encoded, const EncodeOptions& opts) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& spec : encoded.table.specs) cols.push_back(spec.to_json());
    nlohmann::json warnings = nlohmann::json::array();
    for (const auto& w : encoded.warnings) warnings.push_back(w.to_json());
    return nlohmann::json{
        {"n_rows", encoded.table.n_rows},
        {"columns", cols},
        {"warnings", warnings},
        {"options",
         {{"categorical_max_cardinality", opts.categorical_max_cardinality},
          {"missing_policy", opts.missing == MissingPolicy::DropRow ? "drop_row" : "error"}}}};
}

}  // namespace tabgraph
