#pragma once

// Reference computations used only by tests. None of these call into the
// code paths they check.

#include "hvsm/rnn.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hvsm::testing {

/// Per-sample log loss of the recurrent network computed with plain loops.
double naive_rnn_loss(const rnn::Params& p, const std::vector<std::vector<double>>& seq, int y);

/// Central finite differences of naive_rnn_loss with respect to every parameter,
/// laid out like rnn::Params.
rnn::Params finite_difference_gradient(const rnn::Params& p, const std::vector<std::vector<double>>& seq, int y,
                                       double eps = 1e-5);

/// Largest |a - n| / max(|a|, |n|) over all entries (absolute when both are below 1e-8).
double max_relative_error(const rnn::Params& analytic, const rnn::Params& numeric);

struct OracleFile {
    std::string key;
    std::int64_t score_eighths; ///< score = score_eighths / 8
    std::int64_t loc;
    std::int64_t bugs;
};

/// CE_pi from exact rational orderings and clipped trapezoids over every segment.
double brute_force_ce(const std::vector<OracleFile>& files, double pi);

/// AUC by counting every positive/negative pair.
double brute_force_auc(const std::vector<std::pair<double, int>>& scores);

/// Two-sided signed-rank p-value by enumerating all 2^n sign vectors.
double enumerate_wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b);

/// Cliff's delta through the Mann-Whitney U statistic with mid-ranks.
double cliffs_delta_via_ranks(const std::vector<double>& a, const std::vector<double>& b);

} // namespace hvsm::testing
