#pragma once

#include "hvsm/dataset.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace hvsm::eval {

struct ScoredFile {
    FileKey key;
    double score = 0.0;     ///< predicted P(buggy)
    std::uint64_t loc = 1;  ///< >= 1; see make_scored_file
    std::uint64_t bugs = 0; ///< actual bug count
};

/// Builds a ScoredFile, mapping loc = 0 to 1. `adjusted` (if given) is set when that happened.
ScoredFile make_scored_file(FileKey key, double score, std::uint64_t loc, std::uint64_t bugs,
                            bool* adjusted = nullptr);

struct CurvePoint {
    double loc_fraction = 0.0;
    double bug_fraction = 0.0;
};

struct CeCurve {
    std::vector<CurvePoint> points; ///< starts at (0, 0)
    std::vector<FileKey> ordering;
};

/// Descending predicted density score/loc; ties: smaller loc first, then key.
std::vector<ScoredFile> rank_by_density(std::span<const ScoredFile> files);

/// Descending actual density bugs/loc with the same tie-breaks.
std::vector<ScoredFile> rank_optimal(std::span<const ScoredFile> files);

/// Cumulative (LOC share, bug share) after each file of `ordering`, with (0, 0) prepended.
/// With zero total bugs every bug fraction is 0. Throws InvalidArgument when total LOC is 0.
CeCurve ce_curve(std::span<const ScoredFile> ordering);

/// Trapezoidal area under a curve over LOC share [0, pi], interpolating at pi.
double area_up_to(const CeCurve& curve, double pi);

/// Normalized area between the model's density ranking and the random diagonal,
/// relative to the optimal ranking, over the first `pi` share of LOC.
/// Throws UndefinedMetric if no bugs exist or the optimal curve coincides with random.
double ce_pi(std::span<const ScoredFile> files, double pi);

/// ce_pi for an explicit model ordering (files listed in inspection order).
double ce_pi_for_ordering(std::span<const ScoredFile> ordering, double pi);

/// Recall of defective files among those fully inspected, in density order,
/// before cumulative LOC exceeds `effort` of the total.
double acc_at_effort(std::span<const ScoredFile> files, double effort = 0.2);

/// ROC area by rank sums; tied scores count 1/2. Throws UndefinedMetric unless both labels occur.
double auc(std::span<const std::pair<double, int>> scores);

inline constexpr std::array<double, 4> kCePoints = {0.1, 0.2, 0.5, 1.0};

struct CeReport {
    std::array<double, 4> ce{}; ///< at kCePoints
    double acc = 0.0;
    double auc = 0.5;
    std::size_t loc_adjusted = 0; ///< files whose loc 0 was counted as 1
};

/// Everything reported for one scored test set. Labels are bugs > 0.
CeReport evaluate(std::span<const ScoredFile> files, std::size_t loc_adjusted = 0);

/// Two-column CSV of curve vertices.
void write_curve_csv(std::ostream& out, const CeCurve& curve);

} // namespace hvsm::eval
