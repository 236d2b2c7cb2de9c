#include <catch2/catch_amalgamated.hpp>

#include "tabgraph/gbm.hpp"
#include "tabgraph/rng.hpp"

using namespace tabgraph;

namespace {

FeatureMatrix random_features(std::size_t rows, std::size_t cols, Rng& rng) {
    FeatureMatrix x(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) x.at(r, c) = rng.normal();
    return x;
}

void check_cover_consistency(const Tree& tree) {
    for (const auto& node : tree.nodes) {
        if (node.is_leaf()) continue;
        const double child_sum =
            tree.nodes[std::size_t(node.left)].cover + tree.nodes[std::size_t(node.right)].cover;
        CHECK(node.cover == Catch::Approx(child_sum).margin(1e-12));
        CHECK(node.cover > 0);
    }
}

}  // namespace

TEST_CASE("perfectly predictive feature reaches high holdout R^2", "[gbm]") {
    Rng rng(1);
    FeatureMatrix x = random_features(1000, 3, rng);
    std::vector<double> y(1000);
    for (std::size_t r = 0; r < 1000; ++r) y[r] = x.at(r, 0);
    const GbmModel m = fit(x, y, TaskSpec::regression(), {}, 42);
    CHECK(m.acc >= 0.99);
}

TEST_CASE("independent target scores near zero", "[gbm]") {
    Rng rng(2);
    FeatureMatrix x = random_features(1000, 3, rng);
    std::vector<double> y(1000);
    for (auto& v : y) v = rng.normal();
    const GbmModel m = fit(x, y, TaskSpec::regression(), {}, 43);
    CHECK(m.acc <= 0.05);
}

TEST_CASE("separable binary target is classified perfectly", "[gbm]") {
    Rng rng(3);
    FeatureMatrix x = random_features(1000, 3, rng);
    std::vector<double> y(1000);
    for (std::size_t r = 0; r < 1000; ++r) y[r] = x.at(r, 0) > 0 ? 1.0 : 0.0;
    const GbmModel m = fit(x, y, TaskSpec::binary(), {}, 44);
    CHECK(m.acc == 1.0);
}

TEST_CASE("multiclass target with strong signal", "[gbm]") {
    Rng rng(4);
    FeatureMatrix x = random_features(600, 2, rng);
    std::vector<double> y(600);
    for (std::size_t r = 0; r < 600; ++r)
        y[r] = x.at(r, 0) > 0.5 ? 2.0 : (x.at(r, 0) > -0.5 ? 1.0 : 0.0);
    const GbmModel m = fit(x, y, TaskSpec::multiclass(3), {}, 45);
    CHECK(m.acc >= 0.9);
    CHECK(m.predict_raw(x.row(0)).size() == 3);
}

TEST_CASE("predict_raw is the shrunken tree sum", "[gbm]") {
    GbmModel m;
    m.task = TaskSpec::regression();
    m.base_score = {1.5};
    m.learning_rate = 1.0;
    m.n_features = 1;
    m.trees = {{}};

    std::vector<double> row{0.0};
    SECTION("zero trees yield the base score") { CHECK(m.predict_raw(row)[0] == 1.5); }

    Tree stump;
    stump.nodes.resize(3);
    stump.nodes[0] = {0, 1.0, 1, 2, 0.0, 10.0};
    stump.nodes[1] = {-1, 0.0, -1, -1, 2.0, 4.0};
    stump.nodes[2] = {-1, 0.0, -1, -1, 5.0, 6.0};

    SECTION("single stump descends by threshold") {
        m.base_score = {0.0};
        m.trees = {{stump}};
        CHECK(m.predict_raw(row)[0] == 2.0);  // 0 < 1 goes left
        const std::vector<double> right_row{1.5};
        CHECK(m.predict_raw(right_row)[0] == 5.0);
    }

    SECTION("duplicating trees while halving the rate is identity") {
        m.base_score = {0.0};
        m.trees = {{stump}};
        m.learning_rate = 0.8;
        const double once = m.predict_raw(row)[0];
        m.trees = {{stump, stump}};
        m.learning_rate = 0.4;
        CHECK(m.predict_raw(row)[0] == Catch::Approx(once).margin(1e-15));
    }
}

TEST_CASE("accuracy matches its definition", "[gbm]") {
    // classification: fraction correct
    GbmModel cls;
    cls.task = TaskSpec::binary();
    cls.base_score = {0.0};
    cls.n_features = 1;
    Tree sign;
    sign.nodes.resize(3);
    sign.nodes[0] = {0, 0.0, 1, 2, 0.0, 4.0};
    sign.nodes[1] = {-1, 0.0, -1, -1, -1.0, 2.0};
    sign.nodes[2] = {-1, 0.0, -1, -1, 1.0, 2.0};
    cls.trees = {{sign}};
    cls.learning_rate = 1.0;

    FeatureMatrix xh(4, 1);
    xh.at(0, 0) = -1;
    xh.at(1, 0) = -2;
    xh.at(2, 0) = 1;
    xh.at(3, 0) = 2;
    SECTION("perfect classification") {
        std::vector<double> yh{0, 0, 1, 1};
        CHECK(accuracy(cls, xh, yh) == 1.0);
    }
    SECTION("three of four correct") {
        std::vector<double> yh{0, 1, 1, 1};
        CHECK(accuracy(cls, xh, yh) == 0.75);
    }

    // regression: clamped R^2
    GbmModel reg;
    reg.task = TaskSpec::regression();
    reg.base_score = {2.0};  // the holdout mean
    reg.n_features = 1;
    reg.trees = {{}};
    reg.learning_rate = 1.0;
    std::vector<double> yh{1, 2, 3};
    FeatureMatrix xr(3, 1);
    SECTION("predicting the mean gives R^2 = 0") { CHECK(accuracy(reg, xr, yh) == 0.0); }
    SECTION("zero-variance holdout returns 0 with a warning") {
        std::vector<double> flat{2, 2, 2};
        std::vector<std::string> warnings;
        CHECK(accuracy(reg, xr, flat, &warnings) == 0.0);
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("training loss is non-increasing per round", "[gbm]") {
    Rng rng(6);
    FeatureMatrix x = random_features(400, 4, rng);
    std::vector<double> y(400);
    for (std::size_t r = 0; r < 400; ++r)
        y[r] = std::sin(x.at(r, 0)) + 0.3 * x.at(r, 1) + 0.1 * rng.normal();
    const GbmModel reg = fit(x, y, TaskSpec::regression(), {}, 7);
    for (std::size_t i = 1; i < reg.train_loss.size(); ++i)
        CHECK(reg.train_loss[i] <= reg.train_loss[i - 1] + 1e-12);

    std::vector<double> yb(400);
    for (std::size_t r = 0; r < 400; ++r) yb[r] = x.at(r, 0) + 0.5 * rng.normal() > 0 ? 1.0 : 0.0;
    const GbmModel bin = fit(x, yb, TaskSpec::binary(), {}, 8);
    for (std::size_t i = 1; i < bin.train_loss.size(); ++i)
        CHECK(bin.train_loss[i] <= bin.train_loss[i - 1] + 1e-12);
}

TEST_CASE("fit is bit-deterministic and covers are consistent", "[gbm]") {
    Rng rng(9);
    FeatureMatrix x = random_features(200, 3, rng);
    std::vector<double> y(200);
    for (std::size_t r = 0; r < 200; ++r) y[r] = x.at(r, 1) * x.at(r, 2) + 0.2 * rng.normal();
    GbmParams params;
    params.n_trees = 20;
    const GbmModel a = fit(x, y, TaskSpec::regression(), params, 77);
    const GbmModel b = fit(x, y, TaskSpec::regression(), params, 77);
    CHECK(model_to_json(a).dump() == model_to_json(b).dump());

    const GbmModel c = fit(x, y, TaskSpec::regression(), params, 78);
    CHECK(model_to_json(a).dump() != model_to_json(c).dump());  // seed matters

    for (const auto& tree : a.trees[0]) check_cover_consistency(tree);
}

TEST_CASE("fit rejects degenerate inputs", "[gbm]") {
    FeatureMatrix x(10, 2);
    std::vector<double> y(10, 1.0);
    CHECK_THROWS_AS(fit(x, y, TaskSpec::regression(), {}, 1), std::invalid_argument);

    FeatureMatrix x2(30, 2);
    std::vector<double> constant(30, 3.0);
    CHECK_THROWS_AS(fit(x2, constant, TaskSpec::regression(), {}, 1), std::invalid_argument);
}

TEST_CASE("model JSON round-trips predictions", "[gbm]") {
    Rng rng(10);
    FeatureMatrix x = random_features(100, 3, rng);
    std::vector<double> y(100);
    for (std::size_t r = 0; r < 100; ++r) y[r] = x.at(r, 0) - x.at(r, 2);
    GbmParams params;
    params.n_trees = 10;
    const GbmModel m = fit(x, y, TaskSpec::regression(), params, 5);
    const GbmModel back = model_from_json(model_to_json(m));
    for (std::size_t r = 0; r < 10; ++r)
        CHECK(back.predict_raw1(x.row(r)) == m.predict_raw1(x.row(r)));
    CHECK(back.acc == m.acc);
}
