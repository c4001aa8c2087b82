#include "hvsm/baselines.hpp"

#include "hvsm/error.hpp"
#include "hvsm/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

namespace hvsm::baselines {

std::string_view to_string(Kind kind) noexcept {
    switch (kind) {
    case Kind::LogisticRegression:
        return "lr";
    case Kind::GaussianNB:
        return "nb";
    case Kind::Knn:
        return "knn";
    case Kind::FeedforwardNN:
        return "nn";
    }
    return "?";
}

Kind kind_from_string(std::string_view tag) {
    for (Kind k : {Kind::LogisticRegression, Kind::GaussianNB, Kind::Knn, Kind::FeedforwardNN}) {
        if (to_string(k) == tag) {
            return k;
        }
    }
    throw InvalidArgument("unknown baseline '" + std::string(tag) + "' (expected lr, nb, knn or nn)");
}

namespace {

constexpr double kVarianceFloor = 1e-9;

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

std::vector<double> normalized(const Normalizer& n, const MetricVector& x) {
    if (x.schema() != n.schema()) {
        throw InvalidArgument("schema mismatch between baseline model and metric vector");
    }
    std::vector<double> z = x.values();
    n.apply_in_place(z);
    return z;
}

void require_both_classes(std::span<const LabeledVector> data, std::string_view who) {
    bool seen[2] = {false, false};
    for (const auto& s : data) {
        if (s.y != 0 && s.y != 1) {
            throw InvalidArgument("labels must be 0 or 1");
        }
        seen[s.y] = true;
    }
    if (!seen[0] || !seen[1]) {
        throw InvalidArgument(std::string(who) + " needs training samples of both classes");
    }
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& z, std::span<const LabeledVector> data,
                           const LogisticOptions& o) {
    const std::size_t d = z.front().size();
    const double m = static_cast<double>(z.size());
    LogisticModel lr;
    lr.weights.assign(d, 0.0);
    std::vector<double> grad(d);
    for (std::size_t it = 0; it < o.iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double p = sigmoid(std::inner_product(z[i].begin(), z[i].end(), lr.weights.begin(), lr.bias));
            const double err = p - data[i].y;
            for (std::size_t j = 0; j < d; ++j) {
                grad[j] += err * z[i][j];
            }
            grad_bias += err;
        }
        for (std::size_t j = 0; j < d; ++j) {
            lr.weights[j] -= o.eta * (grad[j] / m + o.lambda * lr.weights[j]);
        }
        lr.bias -= o.eta * grad_bias / m;
    }
    return lr;
}

NaiveBayesModel fit_naive_bayes(const std::vector<std::vector<double>>& z, std::span<const LabeledVector> data) {
    const std::size_t d = z.front().size();
    NaiveBayesModel nb;
    std::array<double, 2> count{0, 0};
    for (int c = 0; c < 2; ++c) {
        nb.mean[c].assign(d, 0.0);
        nb.variance[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        const int c = data[i].y;
        count[c] += 1;
        for (std::size_t j = 0; j < d; ++j) {
            nb.mean[c][j] += z[i][j];
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (double& v : nb.mean[c]) {
            v /= count[c];
        }
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        const int c = data[i].y;
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = z[i][j] - nb.mean[c][j];
            nb.variance[c][j] += dev * dev;
        }
    }
    const double total = count[0] + count[1];
    for (int c = 0; c < 2; ++c) {
        for (double& v : nb.variance[c]) {
            v = std::max(v / count[c], kVarianceFloor);
        }
        nb.log_prior[c] = std::log(count[c] / total);
    }
    return nb;
}

double knn_probability(const KnnModel& m, std::span<const double> z) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(m.points.size());
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double diff = z[j] - m.points[i][j];
            s += diff * diff;
        }
        dist.emplace_back(s, i);
    }
    // Pair ordering breaks distance ties by training order.
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m.k), dist.end());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < m.k; ++i) {
        positives += static_cast<std::size_t>(m.labels[dist[i].second]);
    }
    return static_cast<double>(positives) / static_cast<double>(m.k);
}

} // namespace

std::array<double, 2> naive_bayes_posteriors(const NaiveBayesModel& m, std::span<const double> z) {
    std::array<double, 2> log_joint{};
    for (int c = 0; c < 2; ++c) {
        double l = m.log_prior[c];
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double var = m.variance[c][j];
            const double dev = z[j] - m.mean[c][j];
            l += -0.5 * std::log(2.0 * std::numbers::pi * var) - dev * dev / (2.0 * var);
        }
        log_joint[c] = l;
    }
    const double diff = log_joint[1] - log_joint[0];
    return {sigmoid(-diff), sigmoid(diff)};
}

Model train_baseline(Kind kind, std::span<const LabeledVector> data, const Options& options) {
    if (data.empty()) {
        throw InvalidArgument("empty training data for baseline " + std::string(to_string(kind)));
    }
    std::vector<const MetricVector*> xs;
    xs.reserve(data.size());
    for (const auto& s : data) {
        xs.push_back(&s.x);
    }
    Model model;
    model.normalizer = Normalizer::fit(xs);
    std::vector<std::vector<double>> z;
    z.reserve(data.size());
    for (const auto& s : data) {
        z.push_back(normalized(model.normalizer, s.x));
    }

    switch (kind) {
    case Kind::LogisticRegression:
        require_both_classes(data, "logistic regression");
        model.learned = fit_logistic(z, data, options.lr);
        break;
    case Kind::GaussianNB:
        require_both_classes(data, "naive Bayes");
        model.learned = fit_naive_bayes(z, data);
        break;
    case Kind::Knn: {
        if (options.k == 0) {
            throw InvalidArgument("k must be at least 1");
        }
        if (options.k > data.size()) {
            throw InvalidArgument("k = " + std::to_string(options.k) + " exceeds the training size " +
                                  std::to_string(data.size()));
        }
        KnnModel knn;
        knn.k = options.k;
        knn.points = std::move(z);
        for (const auto& s : data) {
            knn.labels.push_back(s.y);
        }
        model.learned = std::move(knn);
        break;
    }
    case Kind::FeedforwardNN: {
        std::vector<rnn::Sample> samples;
        samples.reserve(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            rnn::Sequence x = Eigen::Map<const Eigen::VectorXd>(z[i].data(), static_cast<Eigen::Index>(z[i].size()));
            samples.push_back({std::move(x), data[i].y});
        }
        FeedforwardModel nn;
        nn.hyperparams = options.nn;
        nn.params = rnn::train(samples, options.nn).params;
        model.learned = std::move(nn);
        break;
    }
    }
    return model;
}

double predict_baseline(const Model& m, const MetricVector& x) {
    const std::vector<double> z = normalized(m.normalizer, x);
    return std::visit(
        [&](const auto& learned) -> double {
            using T = std::decay_t<decltype(learned)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                return sigmoid(std::inner_product(z.begin(), z.end(), learned.weights.begin(), learned.bias));
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                return naive_bayes_posteriors(learned, z)[1];
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return knn_probability(learned, z);
            } else {
                rnn::Sequence seq = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
                return rnn::predict(learned.params, seq);
            }
        },
        m.learned);
}

void save_model(std::ostream& out, const Model& m) {
    ModelWriter w(out, std::string("baseline-") + std::string(to_string(m.kind())));
    const std::size_t d = m.normalizer.schema().size();
    w.integer("input_dim", static_cast<long long>(d));
    w.words("schema", m.normalizer.schema());
    w.numbers("norm_mean", m.normalizer.mean());
    w.numbers("norm_std", m.normalizer.stddev());
    std::visit(
        [&](const auto& learned) {
            using T = std::decay_t<decltype(learned)>;
            if constexpr (std::is_same_v<T, LogisticModel>) {
                w.numbers("weights", learned.weights);
                w.number("bias", learned.bias);
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                for (int c = 0; c < 2; ++c) {
                    const std::string suffix = std::to_string(c);
                    w.numbers("mean" + suffix, learned.mean[c]);
                    w.numbers("variance" + suffix, learned.variance[c]);
                    w.number("log_prior" + suffix, learned.log_prior[c]);
                }
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                w.integer("k", static_cast<long long>(learned.k));
                w.integer("count", static_cast<long long>(learned.points.size()));
                std::vector<double> flat;
                std::vector<double> labels;
                for (std::size_t i = 0; i < learned.points.size(); ++i) {
                    flat.insert(flat.end(), learned.points[i].begin(), learned.points[i].end());
                    labels.push_back(learned.labels[i]);
                }
                w.numbers("points", flat);
                w.numbers("labels", labels);
            } else {
                const auto& p = learned.params;
                w.integer("hidden_size", static_cast<long long>(p.hidden_size()));
                w.integer("seed", static_cast<long long>(learned.hyperparams.seed));
                using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                const RowMajor U = p.U;
                w.numbers("U", std::span<const double>(U.data(), static_cast<std::size_t>(U.size())));
                w.numbers("V", std::span<const double>(p.V.data(), static_cast<std::size_t>(p.V.size())));
                w.numbers("b", std::span<const double>(p.b.data(), static_cast<std::size_t>(p.b.size())));
                w.number("c", p.c);
            }
        },
        m.learned);
    w.finish();
}

Model load_model(std::istream& in) {
    ModelReader r(in);
    const std::string prefix = "baseline-";
    if (!r.kind().starts_with(prefix)) {
        throw ParseError("expected a baseline model, found kind '" + r.kind() + "'");
    }
    const Kind kind = kind_from_string(std::string_view(r.kind()).substr(prefix.size()));
    const auto d = static_cast<std::size_t>(r.integer("input_dim"));
    Model m;
    m.normalizer = Normalizer(r.words("schema"), r.numbers("norm_mean", d), r.numbers("norm_std", d));
    switch (kind) {
    case Kind::LogisticRegression:
        m.learned = LogisticModel{r.numbers("weights", d), r.number("bias")};
        break;
    case Kind::GaussianNB: {
        NaiveBayesModel nb;
        for (int c = 0; c < 2; ++c) {
            const std::string suffix = std::to_string(c);
            nb.mean[c] = r.numbers("mean" + suffix, d);
            nb.variance[c] = r.numbers("variance" + suffix, d);
            nb.log_prior[c] = r.number("log_prior" + suffix);
        }
        m.learned = std::move(nb);
        break;
    }
    case Kind::Knn: {
        KnnModel knn;
        knn.k = static_cast<std::size_t>(r.integer("k"));
        const auto n = static_cast<std::size_t>(r.integer("count"));
        const auto flat = r.numbers("points", n * d);
        const auto labels = r.numbers("labels", n);
        for (std::size_t i = 0; i < n; ++i) {
            knn.points.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * d),
                                    flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
            knn.labels.push_back(labels[i] != 0 ? 1 : 0);
        }
        if (knn.k == 0 || knn.k > n) {
            throw ParseError("invalid k in kNN model");
        }
        m.learned = std::move(knn);
        break;
    }
    case Kind::FeedforwardNN: {
        FeedforwardModel nn;
        const auto hs = static_cast<std::size_t>(r.integer("hidden_size"));
        nn.hyperparams.hidden_size = hs;
        nn.hyperparams.seed = static_cast<std::uint64_t>(r.integer("seed"));
        nn.params = rnn::Params::zeros(hs, d);
        using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        const auto u = r.numbers("U", hs * d);
        const auto v = r.numbers("V", hs);
        const auto b = r.numbers("b", hs);
        nn.params.U = Eigen::Map<const RowMajor>(u.data(), static_cast<Eigen::Index>(hs), static_cast<Eigen::Index>(d));
        nn.params.V = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(hs));
        nn.params.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(hs));
        nn.params.c = r.number("c");
        m.learned = std::move(nn);
        break;
    }
    }
    return m;
}

} // namespace hvsm::baselines
