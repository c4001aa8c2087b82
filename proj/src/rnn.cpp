#include "hvsm/rnn.hpp"

#include "hvsm/error.hpp"
#include "hvsm/model_io.hpp"
#include "hvsm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hvsm::rnn {

void Hyperparams::validate() const {
    if (hidden_size == 0) {
        throw InvalidArgument("hidden_size must be positive");
    }
    if (!(eta > 0) || !std::isfinite(eta)) {
        throw InvalidArgument("eta must be positive");
    }
    if (!(lambda >= 0) || !std::isfinite(lambda)) {
        throw InvalidArgument("lambda must be non-negative");
    }
    if (iterations == 0) {
        throw InvalidArgument("iterations must be positive");
    }
    if (!(init_scale >= 0) || !std::isfinite(init_scale)) {
        throw InvalidArgument("init_scale must be non-negative");
    }
}

Params Params::zeros(std::size_t hidden, std::size_t input_dim) {
    const auto h = static_cast<Eigen::Index>(hidden);
    const auto d = static_cast<Eigen::Index>(input_dim);
    Params p;
    p.U = Eigen::MatrixXd::Zero(h, d);
    p.W = Eigen::MatrixXd::Zero(h, h);
    p.V = Eigen::RowVectorXd::Zero(h);
    p.b = Eigen::VectorXd::Zero(h);
    p.c = 0.0;
    return p;
}

double Params::weight_norm_sq() const { return U.squaredNorm() + V.squaredNorm() + W.squaredNorm(); }

bool Params::all_finite() const {
    return U.allFinite() && W.allFinite() && V.allFinite() && b.allFinite() && std::isfinite(c);
}

Params init_params(const Hyperparams& h, std::size_t input_dim) {
    if (input_dim == 0) {
        throw InvalidArgument("input dimension must be at least 1");
    }
    h.validate();
    Params p = Params::zeros(h.hidden_size, input_dim);
    Rng rng(h.seed);
    const double s = h.init_scale;
    // Fixed fill order: U, W, V, each row-major.
    auto fill = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                m(i, j) = rng.uniform(-s, s);
            }
        }
    };
    fill(p.U);
    fill(p.W);
    fill(p.V);
    return p;
}

namespace {

double sigmoid(double z) {
    // Kept strictly inside (0, 1) so the log loss stays finite.
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
    const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(p, lo, hi);
}

double log_loss(double probability, int y) {
    const double p = std::clamp(probability, 1e-12, 1.0 - 1e-12);
    return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

} // namespace

ForwardTrace forward(const Params& p, const Sequence& seq) {
    if (seq.cols() == 0) {
        throw InvalidArgument("empty input sequence");
    }
    if (seq.rows() != p.U.cols()) {
        throw InvalidArgument("input dimension " + std::to_string(seq.rows()) + " does not match model input " +
                              std::to_string(p.U.cols()));
    }
    ForwardTrace trace;
    trace.inputs = seq;
    trace.states.resize(p.U.rows(), seq.cols());
    trace.states.col(0) = (p.U * seq.col(0) + p.b).array().tanh();
    for (Eigen::Index t = 1; t < seq.cols(); ++t) {
        trace.states.col(t) = (p.U * seq.col(t) + p.W * trace.states.col(t - 1) + p.b).array().tanh();
    }
    trace.probability = sigmoid(p.V.dot(trace.states.col(seq.cols() - 1)) + p.c);
    return trace;
}

double loss(double probability, int y, const Params& p, double lambda) {
    if (!(probability > 0.0 && probability < 1.0)) {
        throw InvalidArgument("probability must lie strictly between 0 and 1");
    }
    if (y != 0 && y != 1) {
        throw InvalidArgument("label must be 0 or 1");
    }
    return log_loss(probability, y) + 0.5 * lambda * p.weight_norm_sq();
}

Gradients backward(const Params& p, const ForwardTrace& trace, int y) {
    const Eigen::Index steps = trace.states.cols();
    Gradients g = Params::zeros(p.hidden_size(), p.input_dim());

    const double dz = trace.probability - static_cast<double>(y); // d(log loss)/d(logit)
    g.c = dz;
    g.V = dz * trace.states.col(steps - 1).transpose();

    Eigen::VectorXd ds = p.V.transpose() * dz; // dL/dS^t
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
        const Eigen::VectorXd da = ds.array() * (1.0 - trace.states.col(t).array().square());
        g.U.noalias() += da * trace.inputs.col(t).transpose();
        g.b += da;
        if (t > 0) {
            g.W.noalias() += da * trace.states.col(t - 1).transpose();
            ds.noalias() = p.W.transpose() * da;
        }
    }
    return g;
}

BatchGradient batch_gradient(const Params& p, std::span<const Sample> batch, double lambda) {
    if (batch.empty()) {
        throw InvalidArgument("empty training batch");
    }
    BatchGradient out;
    out.gradient = Params::zeros(p.hidden_size(), p.input_dim());
    Gradients& g = out.gradient;
    double total = 0.0;
    for (const Sample& s : batch) {
        const ForwardTrace trace = forward(p, s.x);
        total += log_loss(trace.probability, s.y);
        const Gradients gs = backward(p, trace, s.y);
        g.U += gs.U;
        g.W += gs.W;
        g.V += gs.V;
        g.b += gs.b;
        g.c += gs.c;
    }
    const double m = static_cast<double>(batch.size());
    g.U = g.U / m + lambda * p.U;
    g.W = g.W / m + lambda * p.W;
    g.V = g.V / m + lambda * p.V;
    g.b /= m;
    g.c /= m;
    out.mean_loss = total / m + 0.5 * lambda * p.weight_norm_sq();
    return out;
}

Sequence to_sequence(const Hvsm& h) {
    if (h.sequence.empty()) {
        throw InvalidArgument("empty HVSM for '" + h.key.str() + "'");
    }
    const auto d = static_cast<Eigen::Index>(h.sequence.front().size());
    Sequence x(d, static_cast<Eigen::Index>(h.length()));
    for (std::size_t t = 0; t < h.length(); ++t) {
        const auto& values = h.sequence[t].values();
        if (static_cast<Eigen::Index>(values.size()) != d) {
            throw InvalidArgument("inconsistent metric dimensions in HVSM for '" + h.key.str() + "'");
        }
        x.col(static_cast<Eigen::Index>(t)) = Eigen::Map<const Eigen::VectorXd>(values.data(), d);
    }
    return x;
}

std::vector<Sample> to_samples(const HvsmSet& set) {
    std::vector<Sample> out;
    out.reserve(set.items.size());
    for (const auto& h : set.items) {
        if (!h.label) {
            throw InvalidArgument("training HVSM for '" + h.key.str() + "' has no label");
        }
        out.push_back({to_sequence(h), *h.label});
    }
    return out;
}

BatchGradient batch_gradient(const Params& p, const HvsmSet& batch, double lambda) {
    const auto samples = to_samples(batch);
    return batch_gradient(p, samples, lambda);
}

namespace {

Params step(const Params& p, const Gradients& g, double eta) {
    Params next = p;
    next.U -= eta * g.U;
    next.W -= eta * g.W;
    next.V -= eta * g.V;
    next.b -= eta * g.b;
    next.c -= eta * g.c;
    return next;
}

} // namespace

TrainResult train(std::span<const Sample> samples, const Hyperparams& h) {
    h.validate();
    if (samples.empty()) {
        throw InvalidArgument("empty training set");
    }
    const auto input_dim = static_cast<std::size_t>(samples.front().x.rows());

    TrainResult result;
    result.params = init_params(h, input_dim);
    result.loss_history.reserve(h.iterations + 1);

    BatchGradient current = batch_gradient(result.params, samples, h.lambda);
    if (!std::isfinite(current.mean_loss)) {
        throw TrainingError("non-finite loss at iteration 0", 0);
    }
    double eta = h.eta;
    for (std::size_t it = 0; it < h.iterations; ++it) {
        result.loss_history.push_back(current.mean_loss);

        Params candidate = step(result.params, current.gradient, eta);
        BatchGradient next = batch_gradient(candidate, samples, h.lambda);
        if (h.step_halving) {
            int tries = 0;
            while (!(next.mean_loss <= current.mean_loss) && tries < 20) {
                eta *= 0.5;
                ++result.halvings;
                ++tries;
                candidate = step(result.params, current.gradient, eta);
                next = batch_gradient(candidate, samples, h.lambda);
            }
            if (!(next.mean_loss <= current.mean_loss)) {
                break; // no descent direction left at any step size tried
            }
        }
        if (!std::isfinite(next.mean_loss) || !candidate.all_finite()) {
            throw TrainingError("non-finite loss at iteration " + std::to_string(it + 1), it + 1);
        }
        result.params = std::move(candidate);
        current = std::move(next);
    }
    result.loss_history.push_back(current.mean_loss);
    return result;
}

TrainResult train(const HvsmSet& normalized_train, const Hyperparams& h) {
    const auto samples = to_samples(normalized_train);
    return train(samples, h);
}

double predict(const Params& p, const Sequence& seq) { return forward(p, seq).probability; }

double predict(const Params& p, const Hvsm& s, const Normalizer& n) {
    Sequence x = to_sequence(s);
    if (static_cast<std::size_t>(x.rows()) != n.mean().size()) {
        throw InvalidArgument("sequence dimension does not match the normalizer");
    }
    for (Eigen::Index t = 0; t < x.cols(); ++t) {
        n.apply_in_place(std::span<double>(x.col(t).data(), static_cast<std::size_t>(x.rows())));
    }
    return predict(p, x);
}

namespace {

// Visits every parameter entry in a fixed order.
template <typename Fn>
void for_each_entry(Params& p, Fn&& fn) {
    for (Eigen::Index i = 0; i < p.U.size(); ++i) {
        fn(p.U.data()[i]);
    }
    for (Eigen::Index i = 0; i < p.W.size(); ++i) {
        fn(p.W.data()[i]);
    }
    for (Eigen::Index i = 0; i < p.V.size(); ++i) {
        fn(p.V.data()[i]);
    }
    for (Eigen::Index i = 0; i < p.b.size(); ++i) {
        fn(p.b.data()[i]);
    }
    fn(p.c);
}

} // namespace

double gradient_check(const Hyperparams& h, std::size_t input_dim, std::size_t steps, int y) {
    if (steps == 0) {
        throw InvalidArgument("gradient check needs at least one step");
    }
    Params p = init_params(h, input_dim);
    Rng rng(h.seed ^ 0x9e3779b97f4a7c15ULL);
    // Non-zero biases so their gradients are exercised away from the origin.
    for (Eigen::Index i = 0; i < p.b.size(); ++i) {
        p.b(i) = rng.uniform(-h.init_scale, h.init_scale);
    }
    p.c = rng.uniform(-h.init_scale, h.init_scale);
    Sequence x(static_cast<Eigen::Index>(input_dim), static_cast<Eigen::Index>(steps));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.normal();
    }

    Params analytic = backward(p, forward(p, x), y);
    std::vector<double> grads;
    for_each_entry(analytic, [&](double& v) { grads.push_back(v); });

    constexpr double eps = 1e-5;
    auto sample_loss = [&](const Params& q) { return log_loss(forward(q, x).probability, y); };

    double worst = 0.0;
    std::size_t k = 0;
    Params probe = p;
    for_each_entry(probe, [&](double& v) {
        const double saved = v;
        v = saved + eps;
        const double up = sample_loss(probe);
        v = saved - eps;
        const double down = sample_loss(probe);
        v = saved;
        const double numeric = (up - down) / (2 * eps);
        const double a = grads[k++];
        const double scale = std::max(std::fabs(a), std::fabs(numeric));
        // Both essentially zero (e.g. W when T = 1): compare absolutely.
        const double err = scale < 1e-8 ? std::fabs(a - numeric) : std::fabs(a - numeric) / scale;
        worst = std::max(worst, err);
    });
    return worst;
}

void save_model(std::ostream& out, const Model& m) {
    const Params& p = m.params;
    const Hyperparams& h = m.hyperparams;
    ModelWriter w(out, "rnn");
    w.integer("input_dim", static_cast<long long>(p.input_dim()));
    w.integer("hidden_size", static_cast<long long>(p.hidden_size()));
    w.integer("seed", static_cast<long long>(h.seed));
    w.number("eta", h.eta);
    w.number("lambda", h.lambda);
    w.integer("iterations", static_cast<long long>(h.iterations));
    w.number("init_scale", h.init_scale);
    w.integer("step_halving", h.step_halving ? 1 : 0);
    w.words("schema", m.normalizer.schema());
    w.numbers("norm_mean", m.normalizer.mean());
    w.numbers("norm_std", m.normalizer.stddev());
    // Row-major parameter arrays.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> U = p.U, W = p.W;
    w.numbers("U", std::span<const double>(U.data(), static_cast<std::size_t>(U.size())));
    w.numbers("W", std::span<const double>(W.data(), static_cast<std::size_t>(W.size())));
    w.numbers("V", std::span<const double>(p.V.data(), static_cast<std::size_t>(p.V.size())));
    w.numbers("b", std::span<const double>(p.b.data(), static_cast<std::size_t>(p.b.size())));
    w.number("c", p.c);
    w.finish();
}

Model load_model(std::istream& in) {
    ModelReader r(in);
    if (r.kind() != "rnn") {
        throw ParseError("expected an rnn model, found kind '" + r.kind() + "'");
    }
    Model m;
    const auto d = static_cast<std::size_t>(r.integer("input_dim"));
    const auto hs = static_cast<std::size_t>(r.integer("hidden_size"));
    m.hyperparams.hidden_size = hs;
    m.hyperparams.seed = static_cast<std::uint64_t>(r.integer("seed"));
    m.hyperparams.eta = r.number("eta");
    m.hyperparams.lambda = r.number("lambda");
    m.hyperparams.iterations = static_cast<std::size_t>(r.integer("iterations"));
    m.hyperparams.init_scale = r.number("init_scale");
    m.hyperparams.step_halving = r.integer("step_halving") != 0;

    auto schema = r.words("schema");
    if (schema.size() != d) {
        throw ParseError("schema length does not match input_dim");
    }
    m.normalizer = Normalizer(std::move(schema), r.numbers("norm_mean", d), r.numbers("norm_std", d));

    const auto hi = static_cast<Eigen::Index>(hs);
    const auto di = static_cast<Eigen::Index>(d);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto u = r.numbers("U", hs * d);
    const auto wv = r.numbers("W", hs * hs);
    const auto v = r.numbers("V", hs);
    const auto b = r.numbers("b", hs);
    m.params.U = Eigen::Map<const RowMajor>(u.data(), hi, di);
    m.params.W = Eigen::Map<const RowMajor>(wv.data(), hi, hi);
    m.params.V = Eigen::Map<const Eigen::RowVectorXd>(v.data(), hi);
    m.params.b = Eigen::Map<const Eigen::VectorXd>(b.data(), hi);
    m.params.c = r.number("c");
    return m;
}

} // namespace hvsm::rnn
