#pragma once

// Variable-length recurrent classifier over metric sequences.
//
//   S^1 = tanh(U x^1 + b)
//   S^t = tanh(U x^t + W S^{t-1} + b)      t = 2..T
//   P   = sigmoid(V S^T + c)
//
// The same U, W, V, b, c are used at every step, so one model handles
// sequences of any length T >= 1. Training minimizes the mean log loss plus
// (lambda/2)(|U|^2 + |V|^2 + |W|^2) with full-batch gradient descent.

#include "hvsm/history.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hvsm::rnn {

struct Hyperparams {
    std::size_t hidden_size = 16;
    double eta = 0.1;
    double lambda = 1e-4;
    std::size_t iterations = 500;
    std::uint64_t seed = 0;
    double init_scale = 0.2;
    /// Undo a step that raised the loss and retry it with half the learning rate.
    bool step_halving = true;

    void validate() const;
};

struct Params {
    Eigen::MatrixXd U;    ///< hidden x input
    Eigen::MatrixXd W;    ///< hidden x hidden
    Eigen::RowVectorXd V; ///< 1 x hidden
    Eigen::VectorXd b;    ///< hidden
    double c = 0.0;

    std::size_t hidden_size() const noexcept { return static_cast<std::size_t>(U.rows()); }
    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(U.cols()); }

    static Params zeros(std::size_t hidden, std::size_t input_dim);

    /// Sum of squared entries of U, V and W. Biases are not regularized.
    double weight_norm_sq() const;
    bool all_finite() const;
};

/// Same shape as Params.
using Gradients = Params;

/// One input sequence; column t is x^{t+1}.
using Sequence = Eigen::MatrixXd;

struct ForwardTrace {
    Sequence inputs;       ///< input x T
    Eigen::MatrixXd states; ///< hidden x T
    double probability = 0.5;

    std::size_t steps() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
};

struct Sample {
    Sequence x;
    int y = 0;
};

/// U, V, W uniform in [-init_scale, init_scale] from `h.seed`; b = 0, c = 0.
Params init_params(const Hyperparams& h, std::size_t input_dim);

/// Throws InvalidArgument for an empty sequence or an input size that does not match U.
ForwardTrace forward(const Params& p, const Sequence& seq);

/// Log loss of one prediction plus the L2 penalty on U, V, W.
/// Throws InvalidArgument unless 0 < probability < 1 and y is 0 or 1.
double loss(double probability, int y, const Params& p, double lambda);

/// Exact gradient of the unregularized per-sample log loss, by backpropagation through time.
Gradients backward(const Params& p, const ForwardTrace& trace, int y);

struct BatchGradient {
    Gradients gradient;
    double mean_loss = 0.0;
};

/// Mean of the per-sample gradients plus lambda * (U, V, W). Throws InvalidArgument on an empty batch.
BatchGradient batch_gradient(const Params& p, std::span<const Sample> batch, double lambda);
BatchGradient batch_gradient(const Params& p, const HvsmSet& batch, double lambda);

/// Converts labelled sequences to dense samples. Throws InvalidArgument if a label is missing.
std::vector<Sample> to_samples(const HvsmSet& set);
Sequence to_sequence(const Hvsm& h);

struct TrainResult {
    Params params;
    /// Batch loss before each step, followed by the loss of the returned params.
    std::vector<double> loss_history;
    std::size_t halvings = 0;
};

/// Full-batch gradient descent. Throws TrainingError if the loss becomes non-finite.
TrainResult train(std::span<const Sample> samples, const Hyperparams& h);
TrainResult train(const HvsmSet& normalized_train, const Hyperparams& h);

double predict(const Params& p, const Sequence& seq);
/// Normalizes the sequence with `n` and runs the forward pass.
double predict(const Params& p, const Hvsm& s, const Normalizer& n);

/// Compares backward() with central differences (step 1e-5) over every
/// parameter for a random model and a random T-step sequence. Returns the
/// largest relative error.
double gradient_check(const Hyperparams& h, std::size_t input_dim, std::size_t steps, int y);

/// A trained network together with the normalizer fitted on its training data.
struct Model {
    Hyperparams hyperparams;
    Params params;
    Normalizer normalizer;

    double predict(const Hvsm& s) const { return rnn::predict(params, s, normalizer); }
};

void save_model(std::ostream& out, const Model& m);
/// Throws ParseError on malformed input or kind other than "rnn".
Model load_model(std::istream& in);

} // namespace hvsm::rnn
