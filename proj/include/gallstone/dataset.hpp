#ifndef GALLSTONE_DATASET_HPP
#define GALLSTONE_DATASET_HPP

#include <Eigen/Dense>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"

namespace gallstone::data {

enum class ColumnKind { continuous, binary };

struct FeatureTable {
    std::vector<std::string> column_names;
    std::vector<ColumnKind> column_kinds;
    Eigen::MatrixXd values;   // n x p
    Eigen::VectorXi outcome;  // length n, 1 = gallstone present

    int n() const { return static_cast<int>(values.rows()); }
    int p() const { return static_cast<int>(values.cols()); }

    int column_index(const std::string& name) const {
        for (int j = 0; j < p(); ++j)
            if (column_names[j] == name) return j;
        throw DataError("column not found: " + name);
    }
    bool has_column(const std::string& name) const {
        for (const auto& c : column_names)
            if (c == name) return true;
        return false;
    }
};

struct CsvSchema {
    std::string outcome_column = "outcome";
    // Optional explicit kinds; columns not listed are inferred (binary iff all
    // observed values are 0/1).
    std::map<std::string, ColumnKind> kinds;
    bool drop_missing_rows = true;
};

struct IngestReport {
    int n = 0;
    int p = 0;
    int outcome_positive = 0;
    int outcome_negative = 0;
    int dropped_rows = 0;

    nlohmann::json to_json() const {
        return {{"n", n},
                {"p", p},
                {"outcome_counts", {{"1", outcome_positive}, {"0", outcome_negative}}},
                {"dropped_rows", dropped_rows}};
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "?";
}

}  // namespace detail

// Reads a comma-separated file with a header row. The outcome column named in
// the schema is required and must be 0/1. Rows with missing cells are dropped
// (counted in the report) or rejected per schema.
inline std::pair<FeatureTable, IngestReport> load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string header_line;
    if (!std::getline(in, header_line)) throw DataError("no data rows in " + path);
    auto header = detail::split_csv_line(header_line);
    for (auto& h : header) h = detail::trim(h);

    int outcome_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == schema.outcome_column) outcome_col = static_cast<int>(j);
    if (outcome_col < 0)
        throw DataError("outcome column '" + schema.outcome_column + "' not in header of " + path);
    for (const auto& [name, kind] : schema.kinds) {
        (void)kind;
        bool found = false;
        for (const auto& h : header)
            if (h == name) found = true;
        if (!found) throw DataError("schema column '" + name + "' not in header of " + path);
    }

    const int p = static_cast<int>(header.size()) - 1;
    if (p < 1) throw DataError("no feature columns in " + path);

    std::vector<std::vector<double>> rows;
    std::vector<int> outcomes;
    int dropped = 0;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        bool missing = false;
        for (auto& c : cells) {
            c = detail::trim(c);
            if (detail::is_missing_token(c)) missing = true;
        }
        if (missing) {
            if (!schema.drop_missing_rows)
                throw DataError("missing cell in row " + std::to_string(line_no));
            ++dropped;
            continue;
        }
        std::vector<double> vals;
        vals.reserve(p);
        int y = 0;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            double v;
            auto res = std::from_chars(cells[j].data(), cells[j].data() + cells[j].size(), v);
            if (res.ec != std::errc() || res.ptr != cells[j].data() + cells[j].size())
                throw DataError("non-numeric cell '" + cells[j] + "' in column '" + header[j] + "', row " +
                                std::to_string(line_no));
            if (static_cast<int>(j) == outcome_col) {
                if (v != 0.0 && v != 1.0)
                    throw DataError("outcome value " + cells[j] + " outside {0,1} in row " + std::to_string(line_no));
                y = static_cast<int>(v);
            } else {
                vals.push_back(v);
            }
        }
        rows.push_back(std::move(vals));
        outcomes.push_back(y);
    }
    if (rows.empty()) throw DataError("no data rows in " + path);

    FeatureTable table;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (static_cast<int>(j) != outcome_col) table.column_names.push_back(header[j]);
    const int n = static_cast<int>(rows.size());
    table.values.resize(n, p);
    table.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) table.values(i, j) = rows[i][j];
        table.outcome(i) = outcomes[i];
    }

    table.column_kinds.resize(p, ColumnKind::continuous);
    for (int j = 0; j < p; ++j) {
        auto it = schema.kinds.find(table.column_names[j]);
        if (it != schema.kinds.end()) {
            table.column_kinds[j] = it->second;
        } else {
            bool all01 = true;
            for (int i = 0; i < n; ++i)
                if (table.values(i, j) != 0.0 && table.values(i, j) != 1.0) all01 = false;
            table.column_kinds[j] = all01 ? ColumnKind::binary : ColumnKind::continuous;
        }
        if (table.column_kinds[j] == ColumnKind::binary)
            for (int i = 0; i < n; ++i)
                if (table.values(i, j) != 0.0 && table.values(i, j) != 1.0)
                    throw DataError("binary column '" + table.column_names[j] + "' has value " +
                                    fmt_double(table.values(i, j)) + " outside {0,1}");
    }

    IngestReport report;
    report.n = n;
    report.p = p;
    report.dropped_rows = dropped;
    for (int i = 0; i < n; ++i) (table.outcome(i) == 1 ? report.outcome_positive : report.outcome_negative)++;
    return {std::move(table), report};
}

// -------------------------------------------------------------- standardize

struct StandardizationParams {
    Eigen::VectorXd mean;   // per column; 0 for pass-through
    Eigen::VectorXd scale;  // per column; 1 for pass-through
    std::vector<bool> pass_through;
};

// Continuous columns are centered and scaled to sample sd 1; binary columns
// pass through untouched.
inline std::pair<FeatureTable, StandardizationParams> standardize(const FeatureTable& table) {
    const int n = table.n(), p = table.p();
    if (n < 2) throw DataError("standardize needs at least 2 rows");
    FeatureTable out = table;
    StandardizationParams params;
    params.mean = Eigen::VectorXd::Zero(p);
    params.scale = Eigen::VectorXd::Ones(p);
    params.pass_through.assign(p, false);
    for (int j = 0; j < p; ++j) {
        if (table.column_kinds[j] == ColumnKind::binary) {
            params.pass_through[j] = true;
            continue;
        }
        const double m = table.values.col(j).mean();
        const double ss = (table.values.col(j).array() - m).square().sum();
        const double sd = std::sqrt(ss / (n - 1));
        if (sd <= 0.0)
            throw DataError("zero-variance continuous column: " + table.column_names[j]);
        params.mean(j) = m;
        params.scale(j) = sd;
        out.values.col(j) = (table.values.col(j).array() - m) / sd;
    }
    return {std::move(out), std::move(params)};
}

inline FeatureTable invert_standardize(const FeatureTable& table, const StandardizationParams& params) {
    FeatureTable out = table;
    for (int j = 0; j < table.p(); ++j) {
        if (params.pass_through[j]) continue;
        out.values.col(j) = table.values.col(j).array() * params.scale(j) + params.mean(j);
    }
    return out;
}

// -------------------------------------------------------------------- folds

struct FoldAssignment {
    std::vector<int> fold_index;  // length n, values in [0, k)
    int k = 0;
    std::uint64_t seed = 0;
};

// Deterministic k-fold partition. With a stratification vector, each class is
// dealt round-robin so per-fold class counts differ by at most one.
inline FoldAssignment make_folds(int n, int k, std::uint64_t seed,
                                 const std::vector<int>* stratify_on = nullptr) {
    if (k < 2 || k > n) throw ConfigError("make_folds: need 2 <= k <= n, got k=" + std::to_string(k) +
                                          ", n=" + std::to_string(n));
    if (stratify_on && static_cast<int>(stratify_on->size()) != n)
        throw ConfigError("make_folds: stratify vector length mismatch");

    FoldAssignment fa;
    fa.fold_index.assign(n, -1);
    fa.k = k;
    fa.seed = seed;
    Rng rng(derive_seed(seed, "folds"));

    std::vector<std::vector<int>> groups;
    if (stratify_on) {
        groups.resize(2);
        for (int i = 0; i < n; ++i) groups[(*stratify_on)[i] == 1 ? 1 : 0].push_back(i);
    } else {
        groups.resize(1);
        groups[0].resize(n);
        for (int i = 0; i < n; ++i) groups[0][i] = i;
    }

    int offset = 0;
    for (auto& g : groups) {
        rng.shuffle(g);
        for (std::size_t i = 0; i < g.size(); ++i)
            fa.fold_index[g[i]] = static_cast<int>((offset + i) % k);
        offset = static_cast<int>((offset + g.size()) % k);
    }
    return fa;
}

// ---------------------------------------------------------------- row subset

inline FeatureTable subset_rows(const FeatureTable& table, const std::vector<int>& rows) {
    FeatureTable out;
    out.column_names = table.column_names;
    out.column_kinds = table.column_kinds;
    out.values.resize(static_cast<int>(rows.size()), table.p());
    out.outcome.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<int>(i)) = table.values.row(rows[i]);
        out.outcome(static_cast<int>(i)) = table.outcome(rows[i]);
    }
    return out;
}

inline FeatureTable select_columns(const FeatureTable& table, const std::vector<int>& cols) {
    FeatureTable out;
    out.values.resize(table.n(), static_cast<int>(cols.size()));
    out.outcome = table.outcome;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.column_names.push_back(table.column_names[cols[j]]);
        out.column_kinds.push_back(table.column_kinds[cols[j]]);
        out.values.col(static_cast<int>(j)) = table.values.col(cols[j]);
    }
    return out;
}

// --------------------------------------------------------------------- split

inline std::pair<FeatureTable, FeatureTable> train_test_split(const FeatureTable& table, double test_fraction,
                                                              std::uint64_t seed, bool stratified) {
    const int n = table.n();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("train_test_split: test_fraction must be in (0,1)");
    const int n_test = static_cast<int>(std::lround(test_fraction * n));
    if (n_test < 1 || n_test >= n)
        throw ConfigError("train_test_split: partition would be empty");

    Rng rng(derive_seed(seed, "split"));
    std::vector<int> test_rows;
    if (stratified) {
        std::vector<int> pos, neg;
        for (int i = 0; i < n; ++i) (table.outcome(i) == 1 ? pos : neg).push_back(i);
        // largest-remainder allocation of the test budget across classes
        const double share_pos = test_fraction * static_cast<double>(pos.size());
        int t_pos = static_cast<int>(std::floor(share_pos));
        int t_neg = n_test - t_pos;
        if (t_neg > static_cast<int>(neg.size()) ||
            (share_pos - std::floor(share_pos) >= 0.5 && t_pos + 1 <= static_cast<int>(pos.size()) &&
             n_test - (t_pos + 1) >= 0 && n_test - (t_pos + 1) <= static_cast<int>(neg.size()))) {
            t_pos = std::min(t_pos + 1, static_cast<int>(pos.size()));
            t_neg = n_test - t_pos;
        }
        rng.shuffle(pos);
        rng.shuffle(neg);
        test_rows.assign(pos.begin(), pos.begin() + t_pos);
        test_rows.insert(test_rows.end(), neg.begin(), neg.begin() + t_neg);
    } else {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        test_rows.assign(idx.begin(), idx.begin() + n_test);
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::vector<int> train_rows;
    std::size_t t = 0;
    for (int i = 0; i < n; ++i) {
        if (t < test_rows.size() && test_rows[t] == i) {
            ++t;
        } else {
            train_rows.push_back(i);
        }
    }
    return {subset_rows(table, train_rows), subset_rows(table, test_rows)};
}

}  // namespace gallstone::data

#endif
