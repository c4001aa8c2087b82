#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hvsm::stats {

struct WilcoxonResult {
    double p_value = 1.0;     ///< two-sided
    double w_plus = 0.0;      ///< rank sum of positive differences
    std::size_t n = 0;        ///< non-zero differences
    bool exact = false;       ///< exact null distribution (n <= kWilcoxonExactLimit)
    bool degenerate = false;  ///< every difference was zero; p = 1
};

inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Paired two-sided Wilcoxon signed-rank test of a - b. Zero differences are
/// dropped and tied magnitudes share average ranks. Small samples use the
/// exact permutation distribution (ties included); larger ones the normal
/// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// (#(a_i > b_j) - #(a_i < b_j)) / (|a| |b|). Throws InvalidArgument on empty input.
double cliffs_delta(std::span<const double> a, std::span<const double> b);

enum class Outcome { Win, Tie, Loss };

std::string_view to_string(Outcome o) noexcept;

inline constexpr double kSignificance = 0.05;
inline constexpr double kNegligibleDelta = 0.147;

/// `delta` is Cliff's delta of the first technique against the second.
Outcome wtl_decision(double p_value, double delta) noexcept;

struct WtlResult {
    Outcome outcome = Outcome::Tie;
    double p_value = 1.0;
    double delta = 0.0;
};

/// Win for `first` iff p < 0.05 and delta(first, second) >= 0.147; Loss iff
/// p < 0.05 and delta(second, first) >= 0.147. Throws on unequal lengths.
WtlResult win_tie_loss(std::span<const double> first, std::span<const double> second);

struct WtlCounts {
    std::size_t win = 0;
    std::size_t tie = 0;
    std::size_t loss = 0;

    void add(Outcome o) noexcept {
        (o == Outcome::Win ? win : o == Outcome::Tie ? tie : loss) += 1;
    }
    std::size_t total() const noexcept { return win + tie + loss; }
};

/// Upper-tail critical value of the chi-square distribution.
double chi_squared_critical(double df, double alpha);

struct SkGrouping {
    /// Best rank first; within a rank, techniques in descending mean order.
    std::vector<std::vector<std::string>> ranks;
    std::map<std::string, double> means;

    /// 1-based rank of a technique, or nullopt if unknown.
    std::optional<std::size_t> rank_of(std::string_view technique) const;
};

/// Scott-Knott clustering of techniques by mean, using the classic likelihood
/// ratio statistic with pooled within-technique variance. All value vectors
/// must have the same length.
SkGrouping scott_knott(const std::map<std::string, std::vector<double>>& values, double alpha = 0.05);

} // namespace hvsm::stats
