#include <doctest.h>

#include "support/fixtures.hpp"

#include "hvsm/baselines.hpp"
#include "hvsm/error.hpp"
#include "hvsm/random.hpp"

#include <memory>
#include <sstream>

using namespace hvsm;
using namespace hvsm::baselines;

namespace {

SchemaPtr one_dim() {
    static const auto s = std::make_shared<const Schema>(Schema{"x"});
    return s;
}

std::vector<LabeledVector> line_data(std::vector<std::pair<double, int>> rows, SchemaPtr schema = one_dim()) {
    std::vector<LabeledVector> out;
    for (auto [x, y] : rows) {
        out.push_back({MetricVector(schema, {x}), y});
    }
    return out;
}

MetricVector at(double x) { return MetricVector(one_dim(), {x}); }

} // namespace

TEST_CASE("kind tags") {
    for (Kind k : {Kind::LogisticRegression, Kind::GaussianNB, Kind::Knn, Kind::FeedforwardNN}) {
        CHECK(kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(kind_from_string("svm"), InvalidArgument);
}

TEST_CASE("logistic regression is monotone on separable 1-D data") {
    const auto data = line_data({{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 1}});
    const auto m = train_baseline(Kind::LogisticRegression, data);
    double prev = -1;
    for (double x = -1; x <= 6; x += 0.5) {
        const double p = predict_baseline(m, at(x));
        CHECK(p > prev);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
    CHECK(predict_baseline(m, at(0)) < 0.5);
    CHECK(predict_baseline(m, at(5)) > 0.5);
}

TEST_CASE("logistic regression ignores a rescaling of the features") {
    Rng rng(4);
    auto schema = std::make_shared<const Schema>(Schema{"a", "b"});
    std::vector<LabeledVector> data, scaled;
    for (int i = 0; i < 60; ++i) {
        const double a = rng.normal(), b = rng.normal();
        const int y = a + 0.5 * b + 0.3 * rng.normal() > 0;
        data.push_back({MetricVector(schema, {a, b}), y});
        scaled.push_back({MetricVector(schema, {1000 * a + 7, 0.01 * b}), y});
    }
    const auto m1 = train_baseline(Kind::LogisticRegression, data);
    const auto m2 = train_baseline(Kind::LogisticRegression, scaled);
    for (int i = 0; i < 60; ++i) {
        const double p1 = predict_baseline(m1, data[i].x);
        const double p2 = predict_baseline(m2, scaled[i].x);
        CHECK(p1 == doctest::Approx(p2).epsilon(1e-9));
    }
}

TEST_CASE("naive Bayes: symmetric classes give one half, posteriors sum to one") {
    const auto data = line_data({{-2, 0}, {-1, 0}, {1, 1}, {2, 1}});
    const auto m = train_baseline(Kind::GaussianNB, data);
    CHECK(predict_baseline(m, at(0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(predict_baseline(m, at(1.5)) > 0.5);
    CHECK(predict_baseline(m, at(-1.5)) < 0.5);

    const auto& nb = std::get<NaiveBayesModel>(m.learned);
    for (double z : {-40.0, -3.0, 0.0, 0.7, 25.0}) {
        const double zs[] = {z};
        const auto post = naive_bayes_posteriors(nb, zs);
        CHECK(post[0] + post[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(post[0] >= 0.0);
        CHECK(post[1] >= 0.0);
    }
}

TEST_CASE("k-nearest neighbours") {
    SUBCASE("k = 1 returns the nearest label") {
        Options o;
        o.k = 1;
        const auto m = train_baseline(Kind::Knn, line_data({{0, 0}, {10, 1}}), o);
        CHECK(predict_baseline(m, at(1)) == 0.0);
        CHECK(predict_baseline(m, at(9)) == 1.0);
    }
    SUBCASE("k = 3 votes") {
        Options o;
        o.k = 3;
        const auto m = train_baseline(Kind::Knn, line_data({{0, 1}, {1, 1}, {2, 0}, {50, 0}}), o);
        CHECK(predict_baseline(m, at(0.5)) == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("k larger than the training set") {
        Options o;
        o.k = 5;
        CHECK_THROWS_AS(train_baseline(Kind::Knn, line_data({{0, 1}, {1, 0}}), o), InvalidArgument);
        o.k = 0;
        CHECK_THROWS_AS(train_baseline(Kind::Knn, line_data({{0, 1}, {1, 0}}), o), InvalidArgument);
    }
}

TEST_CASE("single-class training data is rejected where it cannot work") {
    const auto data = line_data({{0, 1}, {1, 1}, {2, 1}});
    CHECK_THROWS_AS(train_baseline(Kind::LogisticRegression, data), InvalidArgument);
    CHECK_THROWS_AS(train_baseline(Kind::GaussianNB, data), InvalidArgument);
    CHECK_THROWS_AS(train_baseline(Kind::LogisticRegression, {}), InvalidArgument);
}

TEST_CASE("feed-forward network: zero weights predict one half") {
    Model m{Normalizer::identity(Schema{"x"}), FeedforwardModel{rnn::Hyperparams{}, rnn::Params::zeros(4, 1)}};
    for (double x : {-3.0, 0.0, 1.7, 250.0}) {
        CHECK(predict_baseline(m, at(x)) == 0.5);
    }
    Options o;
    o.nn.hidden_size = 4;
    o.nn.iterations = 30;
    const auto trained = train_baseline(Kind::FeedforwardNN, line_data({{0, 0}, {1, 1}, {2, 0}, {3, 1}}), o);
    CHECK(trained.kind() == Kind::FeedforwardNN);
}

TEST_CASE("schema mismatch on prediction") {
    const auto m = train_baseline(Kind::GaussianNB, line_data({{0, 0}, {1, 1}}));
    auto other = std::make_shared<const Schema>(Schema{"x", "y"});
    CHECK_THROWS_AS(predict_baseline(m, MetricVector(other, {1, 2})), InvalidArgument);
}

TEST_CASE("save/load round trip for every baseline") {
    Rng rng(31);
    auto schema = std::make_shared<const Schema>(Schema{"a", "b", "loc"});
    std::vector<LabeledVector> data;
    for (int i = 0; i < 40; ++i) {
        const double a = rng.normal();
        data.push_back({MetricVector(schema, {a, rng.normal(), std::floor(rng.uniform(1, 100))}), a > 0});
    }
    Options o;
    o.nn.hidden_size = 3;
    o.nn.iterations = 20;
    for (Kind k : {Kind::LogisticRegression, Kind::GaussianNB, Kind::Knn, Kind::FeedforwardNN}) {
        CAPTURE(to_string(k));
        const auto m = train_baseline(k, data, o);
        std::stringstream io;
        save_model(io, m);
        const auto back = load_model(io);
        CHECK(back.kind() == k);
        for (const auto& lv : data) {
            CHECK(predict_baseline(back, lv.x) == predict_baseline(m, lv.x));
        }
    }
}
