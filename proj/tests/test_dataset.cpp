#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "gallstone/dataset.hpp"
#include "gallstone/synthetic.hpp"

using namespace gallstone;
using namespace gallstone::data;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("load_csv ingests a valid file") {
    const auto path = write_temp_csv("ds_valid.csv",
                                     "a,b,outcome\n"
                                     "1.5,0,1\n"
                                     "2.5,1,0\n"
                                     "3.0,1,1\n");
    CsvSchema schema;
    auto [table, report] = load_csv(path, schema);
    REQUIRE(table.n() == 3);
    REQUIRE(table.p() == 2);
    REQUIRE(report.outcome_positive == 2);
    REQUIRE(report.outcome_negative == 1);
    REQUIRE(table.column_kinds[0] == ColumnKind::continuous);
    REQUIRE(table.column_kinds[1] == ColumnKind::binary);
    REQUIRE(table.values(0, 0) == 1.5);
}

TEST_CASE("load_csv rejects degenerate inputs") {
    CsvSchema schema;
    SECTION("missing file") {
        REQUIRE_THROWS_AS(load_csv("/nonexistent/xyz.csv", schema), DataError);
    }
    SECTION("empty file") {
        const auto path = write_temp_csv("ds_empty.csv", "");
        REQUIRE_THROWS_WITH(load_csv(path, schema), Catch::Matchers::ContainsSubstring("no data rows"));
    }
    SECTION("header only") {
        const auto path = write_temp_csv("ds_header.csv", "a,outcome\n");
        REQUIRE_THROWS_WITH(load_csv(path, schema), Catch::Matchers::ContainsSubstring("no data rows"));
    }
    SECTION("one valid row") {
        const auto path = write_temp_csv("ds_one.csv", "a,outcome\n4.0,1\n");
        auto [table, report] = load_csv(path, schema);
        REQUIRE(table.n() == 1);
    }
    SECTION("missing outcome column") {
        const auto path = write_temp_csv("ds_noout.csv", "a,b\n1,2\n");
        REQUIRE_THROWS_AS(load_csv(path, schema), DataError);
    }
    SECTION("schema name not in header") {
        CsvSchema s2;
        s2.kinds["zz"] = ColumnKind::continuous;
        const auto path = write_temp_csv("ds_schema.csv", "a,outcome\n1,0\n");
        REQUIRE_THROWS_WITH(load_csv(path, s2), Catch::Matchers::ContainsSubstring("zz"));
    }
    SECTION("non-numeric cell") {
        const auto path = write_temp_csv("ds_alpha.csv", "a,outcome\nfoo,1\n");
        REQUIRE_THROWS_WITH(load_csv(path, schema), Catch::Matchers::ContainsSubstring("non-numeric"));
    }
    SECTION("declared binary column with out-of-range value") {
        CsvSchema s2;
        s2.kinds["a"] = ColumnKind::binary;
        const auto path = write_temp_csv("ds_bin.csv", "a,outcome\n2,1\n");
        REQUIRE_THROWS_WITH(load_csv(path, s2), Catch::Matchers::ContainsSubstring("outside {0,1}"));
    }
    SECTION("outcome outside 0/1") {
        const auto path = write_temp_csv("ds_out2.csv", "a,outcome\n1,2\n");
        REQUIRE_THROWS_AS(load_csv(path, schema), DataError);
    }
}

TEST_CASE("load_csv drops and counts rows with missing cells") {
    const auto path = write_temp_csv("ds_missing.csv",
                                     "a,b,outcome\n"
                                     "1,2,1\n"
                                     ",2,0\n"
                                     "3,NA,1\n"
                                     "4,5,0\n");
    CsvSchema schema;
    auto [table, report] = load_csv(path, schema);
    REQUIRE(table.n() == 2);
    REQUIRE(report.dropped_rows == 2);

    schema.drop_missing_rows = false;
    REQUIRE_THROWS_AS(load_csv(path, schema), DataError);
}

TEST_CASE("standardize centers and scales continuous columns") {
    FeatureTable t;
    t.column_names = {"x", "b"};
    t.column_kinds = {ColumnKind::continuous, ColumnKind::binary};
    t.values.resize(3, 2);
    t.values << 1, 0, 2, 1, 3, 1;
    t.outcome = Eigen::VectorXi::Zero(3);

    auto [st, params] = standardize(t);
    REQUIRE(st.values(0, 0) == Catch::Approx(-1.0));
    REQUIRE(st.values(1, 0) == Catch::Approx(0.0));
    REQUIRE(st.values(2, 0) == Catch::Approx(1.0));
    // binary column untouched
    REQUIRE(st.values(0, 1) == 0.0);
    REQUIRE(st.values(1, 1) == 1.0);
    REQUIRE(params.pass_through[1]);
}

TEST_CASE("standardize round-trips within 1e-12") {
    Rng rng(7);
    FeatureTable t;
    const int n = 40, p = 6;
    t.values.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) t.values(i, j) = 3.0 + 10.0 * rng.normal();
    for (int j = 0; j < p; ++j) {
        t.column_names.push_back("c" + std::to_string(j));
        t.column_kinds.push_back(ColumnKind::continuous);
    }
    t.outcome = Eigen::VectorXi::Zero(n);

    auto [st, params] = standardize(t);
    const FeatureTable back = invert_standardize(st, params);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) REQUIRE(std::abs(back.values(i, j) - t.values(i, j)) <= 1e-12);
    // standardized moments
    for (int j = 0; j < p; ++j) {
        REQUIRE(std::abs(st.values.col(j).mean()) < 1e-12);
        const double sd = std::sqrt(st.values.col(j).squaredNorm() / (n - 1));
        REQUIRE(sd == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("standardize rejects zero-variance columns by name") {
    FeatureTable t;
    t.column_names = {"flat"};
    t.column_kinds = {ColumnKind::continuous};
    t.values = Eigen::MatrixXd::Constant(5, 1, 2.0);
    t.outcome = Eigen::VectorXi::Zero(5);
    REQUIRE_THROWS_WITH(standardize(t), Catch::Matchers::ContainsSubstring("flat"));
}

TEST_CASE("make_folds partitions exactly") {
    SECTION("leave-one-out limit") {
        const auto fa = make_folds(10, 10, 1);
        std::vector<int> sizes(10, 0);
        for (int f : fa.fold_index) sizes[f]++;
        for (int s : sizes) REQUIRE(s == 1);
    }
    SECTION("319 rows, 10 folds") {
        const auto fa = make_folds(319, 10, 42);
        std::vector<int> sizes(10, 0);
        for (int f : fa.fold_index) {
            REQUIRE(f >= 0);
            REQUIRE(f < 10);
            sizes[f]++;
        }
        for (int s : sizes) REQUIRE((s == 31 || s == 32));
    }
    SECTION("invalid k") {
        REQUIRE_THROWS_AS(make_folds(10, 11, 1), ConfigError);
        REQUIRE_THROWS_AS(make_folds(10, 1, 1), ConfigError);
    }
    SECTION("deterministic") {
        const auto a = make_folds(57, 5, 9);
        const auto b = make_folds(57, 5, 9);
        REQUIRE(a.fold_index == b.fold_index);
    }
    SECTION("partition property across shapes") {
        for (auto [n, k] : std::vector<std::pair<int, int>>{{23, 4}, {100, 7}, {15, 15}, {64, 2}}) {
            const auto fa = make_folds(n, k, 1234 + n);
            std::vector<int> sizes(k, 0);
            for (int f : fa.fold_index) sizes[f]++;
            int lo = n, hi = 0;
            for (int s : sizes) {
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            REQUIRE(lo >= 1);
            REQUIRE(hi - lo <= 1);
        }
    }
}

TEST_CASE("stratified folds balance classes within one subject") {
    std::vector<int> y(90, 0);
    for (int i = 0; i < 36; ++i) y[i] = 1;  // 40% positives
    const auto fa = make_folds(90, 9, 3, &y);
    for (int f = 0; f < 9; ++f) {
        int pos = 0, tot = 0;
        for (int i = 0; i < 90; ++i)
            if (fa.fold_index[i] == f) {
                ++tot;
                pos += y[i];
            }
        REQUIRE(tot == 10);
        REQUIRE(std::abs(pos - 4) <= 1);
    }
}

namespace {

FeatureTable numbered_table(int n) {
    FeatureTable t;
    t.column_names = {"id", "cls"};
    t.column_kinds = {ColumnKind::continuous, ColumnKind::binary};
    t.values.resize(n, 2);
    t.outcome.resize(n);
    for (int i = 0; i < n; ++i) {
        t.values(i, 0) = i;
        t.values(i, 1) = (i % 2 == 0) ? 1.0 : 0.0;
        t.outcome(i) = (i % 2 == 0) ? 1 : 0;
    }
    return t;
}

}  // namespace

TEST_CASE("train_test_split is a stratified exact partition") {
    const auto t = numbered_table(100);
    auto [train, test] = train_test_split(t, 0.2, 11, true);
    REQUIRE(test.n() == 20);
    REQUIRE(train.n() == 80);
    int pos = 0;
    for (int i = 0; i < test.n(); ++i) pos += test.outcome(i);
    REQUIRE(pos == 10);

    std::set<int> seen;
    for (int i = 0; i < train.n(); ++i) seen.insert(static_cast<int>(train.values(i, 0)));
    for (int i = 0; i < test.n(); ++i) seen.insert(static_cast<int>(test.values(i, 0)));
    REQUIRE(seen.size() == 100);  // disjoint and exhaustive
}

TEST_CASE("train_test_split determinism and validation") {
    const auto t = numbered_table(50);
    auto [tr1, te1] = train_test_split(t, 0.3, 5, true);
    auto [tr2, te2] = train_test_split(t, 0.3, 5, true);
    REQUIRE(te1.values == te2.values);
    REQUIRE(tr1.values == tr2.values);

    REQUIRE_THROWS_AS(train_test_split(t, 1.0, 5, false), ConfigError);
    REQUIRE_THROWS_AS(train_test_split(t, 0.0, 5, false), ConfigError);
    REQUIRE_THROWS_AS(train_test_split(t, 0.001, 5, false), ConfigError);  // empty test set
}

TEST_CASE("gallstone surrogate matches the published shape") {
    const auto t = make_gallstone_surrogate();
    REQUIRE(t.n() == 319);
    REQUIRE(t.p() == 38);
    int pos = 0;
    for (int i = 0; i < t.n(); ++i) pos += t.outcome(i);
    REQUIRE(pos == 158);
    REQUIRE(t.has_column("CRP"));
    REQUIRE(t.has_column("VitD"));
    REQUIRE(t.column_kinds[t.column_index("Hyper")] == ColumnKind::binary);
    // deterministic
    const auto t2 = make_gallstone_surrogate();
    REQUIRE(t.values == t2.values);
}
