#pragma once

#include "hvsm/history.hpp"
#include "hvsm/rnn.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace hvsm::baselines {

enum class Kind { LogisticRegression, GaussianNB, Knn, FeedforwardNN };

std::string_view to_string(Kind kind) noexcept;
/// Accepts "lr", "nb", "knn", "nn". Throws InvalidArgument otherwise.
Kind kind_from_string(std::string_view tag);

struct LogisticOptions {
    double eta = 0.5;
    double lambda = 1e-4;
    std::size_t iterations = 1000;
};

struct Options {
    LogisticOptions lr;
    std::size_t k = 5;
    rnn::Hyperparams nn;
};

struct LabeledVector {
    MetricVector x;
    int y = 0;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
};

struct NaiveBayesModel {
    std::array<std::vector<double>, 2> mean;
    std::array<std::vector<double>, 2> variance;
    std::array<double, 2> log_prior{};
};

struct KnnModel {
    std::size_t k = 5;
    std::vector<std::vector<double>> points; ///< normalized, in training order
    std::vector<int> labels;
};

struct FeedforwardModel {
    rnn::Hyperparams hyperparams;
    rnn::Params params;
};

struct Model {
    Normalizer normalizer;
    std::variant<LogisticModel, NaiveBayesModel, KnnModel, FeedforwardModel> learned;

    Kind kind() const noexcept { return static_cast<Kind>(learned.index()); }
};

/// Features are z-scored with a normalizer fitted on `data`. LR and NB need
/// both classes; kNN needs k <= |data|.
Model train_baseline(Kind kind, std::span<const LabeledVector> data, const Options& options = {});

/// Defect probability in [0, 1]. Throws InvalidArgument on a schema mismatch.
double predict_baseline(const Model& m, const MetricVector& x);

/// Naive Bayes class posteriors {P(clean), P(buggy)} of an already-normalized vector.
std::array<double, 2> naive_bayes_posteriors(const NaiveBayesModel& m, std::span<const double> z);

void save_model(std::ostream& out, const Model& m);
Model load_model(std::istream& in);

} // namespace hvsm::baselines
