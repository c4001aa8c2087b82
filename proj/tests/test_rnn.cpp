#include <doctest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include "hvsm/error.hpp"
#include "hvsm/random.hpp"
#include "hvsm/rnn.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace hvsm;
using namespace hvsm::rnn;

namespace {

Params random_params(std::size_t h, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    Params p = Params::zeros(h, d);
    auto fill = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = rng.uniform(-0.6, 0.6);
        }
    };
    fill(p.U);
    fill(p.W);
    fill(p.V);
    fill(p.b);
    p.c = rng.uniform(-0.5, 0.5);
    return p;
}

Sequence random_sequence(std::size_t d, std::size_t t, Rng& rng) {
    Sequence s(d, t);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        s.data()[i] = rng.normal();
    }
    return s;
}

std::vector<std::vector<double>> as_steps(const Sequence& s) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(s.cols()));
    for (Eigen::Index t = 0; t < s.cols(); ++t) {
        for (Eigen::Index j = 0; j < s.rows(); ++j) {
            out[static_cast<std::size_t>(t)].push_back(s(j, t));
        }
    }
    return out;
}

double max_abs_diff(const Params& a, const Params& b) {
    double m = std::fabs(a.c - b.c);
    m = std::max(m, (a.U - b.U).cwiseAbs().maxCoeff());
    m = std::max(m, (a.W - b.W).cwiseAbs().maxCoeff());
    m = std::max(m, (a.V - b.V).cwiseAbs().maxCoeff());
    m = std::max(m, (a.b - b.b).cwiseAbs().maxCoeff());
    return m;
}

} // namespace

TEST_CASE("zero parameters predict one half and cost ln 2") {
    const Params p = Params::zeros(3, 2);
    Sequence x(2, 1);
    x << 1.0, 2.0;
    const auto trace = forward(p, x);
    CHECK(trace.probability == 0.5);
    CHECK(loss(trace.probability, 1, p, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
    CHECK(loss(trace.probability, 0, p, 0.0) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));

    const auto g = backward(p, trace, 1);
    CHECK(g.c == doctest::Approx(trace.probability - 1.0));
    CHECK(backward(p, trace, 0).c == doctest::Approx(trace.probability));
}

TEST_CASE("forward/loss argument checks") {
    const Params p = Params::zeros(2, 3);
    CHECK_THROWS_AS(forward(p, Sequence(3, 0)), InvalidArgument);
    CHECK_THROWS_AS(forward(p, Sequence::Zero(4, 2)), InvalidArgument);
    CHECK_THROWS_AS(loss(0.0, 1, p, 0.0), InvalidArgument);
    CHECK_THROWS_AS(loss(1.0, 0, p, 0.0), InvalidArgument);
    CHECK_THROWS_AS(loss(0.5, 2, p, 0.0), InvalidArgument);
}

TEST_CASE("single-step sequences give no recurrent gradient") {
    Rng rng(3);
    const Params p = random_params(4, 3, 17);
    const auto trace = forward(p, random_sequence(3, 1, rng));
    const auto g = backward(p, trace, 1);
    CHECK(g.W.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.U.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward agrees with the loop implementation") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Params p = random_params(1 + rng.below(6), 1 + rng.below(5), 100 + trial);
        const auto x = random_sequence(p.input_dim(), 1 + rng.below(6), rng);
        for (int y : {0, 1}) {
            const double mine = loss(forward(p, x).probability, y, p, 0.0);
            CHECK(mine == doctest::Approx(testing::naive_rnn_loss(p, as_steps(x), y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("BPTT matches finite differences of an independent loss") {
    Rng rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t h = 1 + rng.below(5);
        const std::size_t d = 1 + rng.below(4);
        const std::size_t t = 1 + rng.below(5);
        const int y = static_cast<int>(rng.below(2));
        const Params p = random_params(h, d, 500 + trial);
        const auto x = random_sequence(d, t, rng);
        const auto analytic = backward(p, forward(p, x), y);
        const auto numeric = testing::finite_difference_gradient(p, as_steps(x), y);
        CHECK(testing::max_relative_error(analytic, numeric) < 1e-5);
    }
}

TEST_CASE("gradient_check stays below 1e-5") {
    for (std::size_t steps = 1; steps <= 5; ++steps) {
        Hyperparams h;
        h.hidden_size = 4;
        h.seed = steps;
        CHECK(gradient_check(h, 4, steps, 1) < 1e-5);
        CHECK(gradient_check(h, 4, steps, 0) < 1e-5);
    }
}

TEST_CASE("hidden states depend only on the prefix") {
    Rng rng(8);
    const Params p = random_params(5, 3, 2);
    auto x = random_sequence(3, 5, rng);
    const auto before = forward(p, x);
    for (Eigen::Index t = 0; t < 5; ++t) {
        auto changed = x;
        changed.col(t) = random_sequence(3, 1, rng).col(0);
        const auto after = forward(p, changed);
        if (t > 0) {
            CHECK((before.states.leftCols(t) - after.states.leftCols(t)).cwiseAbs().maxCoeff() == 0.0);
        }
        CHECK((before.states.col(t) - after.states.col(t)).cwiseAbs().maxCoeff() > 0.0);
    }
    CHECK(before.states.cwiseAbs().maxCoeff() < 1.0);
    // Sequences of different lengths share one model.
    CHECK(forward(p, x.leftCols(2)).probability > 0.0);
    CHECK(forward(p, x.leftCols(3)).probability < 1.0);
}

TEST_CASE("duplicating every sample leaves the batch gradient unchanged") {
    Rng rng(12);
    const Params p = random_params(4, 2, 4);
    std::vector<Sample> batch;
    for (int i = 0; i < 7; ++i) {
        batch.push_back({random_sequence(2, 1 + rng.below(4), rng), static_cast<int>(rng.below(2))});
    }
    auto twice = batch;
    twice.insert(twice.end(), batch.begin(), batch.end());
    const auto a = batch_gradient(p, batch, 0.01);
    const auto b = batch_gradient(p, twice, 0.01);
    CHECK(max_abs_diff(a.gradient, b.gradient) < 1e-12);
    CHECK(a.mean_loss == doctest::Approx(b.mean_loss).epsilon(1e-12));
    CHECK_THROWS_AS(batch_gradient(p, std::span<const Sample>{}, 0.0), InvalidArgument);
}

TEST_CASE("regularization adds lambda times the weights, not the biases") {
    Rng rng(13);
    const Params p = random_params(3, 2, 5);
    std::vector<Sample> batch;
    for (int i = 0; i < 5; ++i) {
        batch.push_back({random_sequence(2, 3, rng), i % 2});
    }
    const double lambda = 0.37;
    const auto plain = batch_gradient(p, batch, 0.0);
    const auto reg = batch_gradient(p, batch, lambda);
    CHECK((reg.gradient.U - plain.gradient.U - lambda * p.U).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((reg.gradient.W - plain.gradient.W - lambda * p.W).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((reg.gradient.V - plain.gradient.V - lambda * p.V).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((reg.gradient.b - plain.gradient.b).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(reg.gradient.c == plain.gradient.c);
    CHECK(reg.mean_loss == doctest::Approx(plain.mean_loss + lambda / 2 * p.weight_norm_sq()).epsilon(1e-12));
}

TEST_CASE("a small step along the negative gradient lowers the loss") {
    Rng rng(14);
    const Params p = random_params(4, 3, 6);
    std::vector<Sample> batch;
    for (int i = 0; i < 12; ++i) {
        batch.push_back({random_sequence(3, 1 + rng.below(4), rng), static_cast<int>(rng.below(2))});
    }
    const auto g = batch_gradient(p, batch, 1e-3);
    Params q = p;
    const double eta = 1e-3;
    q.U -= eta * g.gradient.U;
    q.W -= eta * g.gradient.W;
    q.V -= eta * g.gradient.V;
    q.b -= eta * g.gradient.b;
    q.c -= eta * g.gradient.c;
    CHECK(batch_gradient(q, batch, 1e-3).mean_loss < g.mean_loss);
}

TEST_CASE("init_params follows the scale and seed") {
    Hyperparams h;
    h.hidden_size = 6;
    h.seed = 42;
    const auto a = init_params(h, 4);
    const auto b = init_params(h, 4);
    CHECK(max_abs_diff(a, b) == 0.0);
    CHECK(a.U.cwiseAbs().maxCoeff() <= h.init_scale);
    CHECK(a.W.cwiseAbs().maxCoeff() <= h.init_scale);
    CHECK(a.b.isZero());
    CHECK(a.c == 0.0);
    h.seed = 43;
    CHECK(max_abs_diff(a, init_params(h, 4)) > 0.0);
}

TEST_CASE("Hyperparams validation") {
    Hyperparams h;
    h.hidden_size = 0;
    CHECK_THROWS_AS(h.validate(), InvalidArgument);
    h = {};
    h.eta = -1;
    CHECK_THROWS_AS(h.validate(), InvalidArgument);
    h = {};
    h.lambda = -1;
    CHECK_THROWS_AS(h.validate(), InvalidArgument);
}

TEST_CASE("training is deterministic and reduces the loss") {
    const auto project = testing::trend_project(120, 3, 3);
    const auto set = extract_hvsm_set(project, "3", 3);
    const auto normalized = apply_normalizer(fit_normalizer(set), set);
    Hyperparams h;
    h.hidden_size = 8;
    h.iterations = 60;
    h.seed = 7;
    const auto a = train(normalized, h);
    const auto b = train(normalized, h);
    CHECK(max_abs_diff(a.params, b.params) == 0.0);
    CHECK(a.loss_history == b.loss_history);
    REQUIRE(a.loss_history.size() == h.iterations + 1);
    CHECK(a.loss_history.back() < a.loss_history.front());
}

TEST_CASE("an exploding learning rate is reported as a training error") {
    std::vector<Sample> batch;
    Sequence x(1, 1);
    x << 1e300;
    batch.push_back({x, 1});
    Hyperparams h;
    h.step_halving = false;
    h.eta = 1e300;
    h.iterations = 5;
    CHECK_THROWS_AS(train(batch, h), TrainingError);
}

TEST_CASE("model save/load round trip") {
    const auto project = testing::trend_project(40, 5, 3);
    const auto set = extract_hvsm_set(project, "3", 3);
    Model m;
    m.hyperparams.hidden_size = 5;
    m.hyperparams.iterations = 10;
    m.normalizer = fit_normalizer(set);
    m.params = train(apply_normalizer(m.normalizer, set), m.hyperparams).params;

    std::stringstream io;
    save_model(io, m);
    const Model back = load_model(io);
    CHECK(max_abs_diff(m.params, back.params) == 0.0);
    CHECK(back.hyperparams.hidden_size == 5);
    CHECK(back.normalizer.mean() == m.normalizer.mean());
    for (const auto& h : set.items) {
        CHECK(back.predict(h) == m.predict(h));
    }

    std::istringstream wrong("hvsm-model 1\nkind baseline-lr\nend\n");
    CHECK_THROWS_AS(load_model(wrong), ParseError);
    std::istringstream garbage("not a model");
    CHECK_THROWS_AS(load_model(garbage), ParseError);
}
