#include "hvsm/effort_eval.hpp"

#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace hvsm::eval {

ScoredFile make_scored_file(FileKey key, double score, std::uint64_t loc, std::uint64_t bugs, bool* adjusted) {
    if (!std::isfinite(score)) {
        throw InvalidArgument("non-finite score for '" + key.str() + "'");
    }
    if (adjusted) {
        *adjusted = loc == 0;
    }
    return ScoredFile{std::move(key), score, loc == 0 ? 1 : loc, bugs};
}

namespace {

template <typename Density>
std::vector<ScoredFile> rank_by(std::span<const ScoredFile> files, Density density) {
    std::vector<ScoredFile> out(files.begin(), files.end());
    std::stable_sort(out.begin(), out.end(), [&](const ScoredFile& a, const ScoredFile& b) {
        const double da = density(a);
        const double db = density(b);
        if (da != db) {
            return da > db;
        }
        if (a.loc != b.loc) {
            return a.loc < b.loc;
        }
        return a.key < b.key;
    });
    return out;
}

double total_bugs(std::span<const ScoredFile> files) {
    double total = 0.0;
    for (const auto& f : files) {
        total += static_cast<double>(f.bugs);
    }
    return total;
}

} // namespace

std::vector<ScoredFile> rank_by_density(std::span<const ScoredFile> files) {
    return rank_by(files, [](const ScoredFile& f) { return f.score / static_cast<double>(f.loc); });
}

std::vector<ScoredFile> rank_optimal(std::span<const ScoredFile> files) {
    return rank_by(files,
                   [](const ScoredFile& f) { return static_cast<double>(f.bugs) / static_cast<double>(f.loc); });
}

CeCurve ce_curve(std::span<const ScoredFile> ordering) {
    double loc_total = 0.0;
    for (const auto& f : ordering) {
        loc_total += static_cast<double>(f.loc);
    }
    if (!(loc_total > 0)) {
        throw InvalidArgument("CE curve needs a positive total LOC");
    }
    const double bug_total = total_bugs(ordering);

    CeCurve curve;
    curve.points.reserve(ordering.size() + 1);
    curve.points.push_back({0.0, 0.0});
    double loc_sum = 0.0;
    double bug_sum = 0.0;
    for (const auto& f : ordering) {
        loc_sum += static_cast<double>(f.loc);
        bug_sum += static_cast<double>(f.bugs);
        curve.points.push_back({loc_sum / loc_total, bug_total > 0 ? bug_sum / bug_total : 0.0});
        curve.ordering.push_back(f.key);
    }
    if (bug_total > 0) {
        curve.points.back() = {1.0, 1.0};
    } else {
        curve.points.back().loc_fraction = 1.0;
    }
    return curve;
}

double area_up_to(const CeCurve& curve, double pi) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto [x0, y0] = curve.points[i - 1];
        const auto [x1, y1] = curve.points[i];
        if (x1 <= pi) {
            area += (x1 - x0) * (y0 + y1) / 2.0;
            continue;
        }
        if (x0 < pi) {
            const double y_pi = y0 + (y1 - y0) * (pi - x0) / (x1 - x0);
            area += (pi - x0) * (y0 + y_pi) / 2.0;
        }
        break;
    }
    return area;
}

double ce_pi_for_ordering(std::span<const ScoredFile> ordering, double pi) {
    if (!(pi > 0.0 && pi <= 1.0)) {
        throw InvalidArgument("pi must lie in (0, 1]");
    }
    if (ordering.empty()) {
        throw InvalidArgument("CE needs at least one file");
    }
    if (total_bugs(ordering) == 0) {
        throw UndefinedMetric("CE is undefined without any bugs");
    }
    const auto optimal = rank_optimal(ordering);
    const double model_area = area_up_to(ce_curve(ordering), pi);
    const double optimal_area = area_up_to(ce_curve(optimal), pi);
    const double random_area = pi * pi / 2.0;
    const double denom = optimal_area - random_area;
    if (std::fabs(denom) < 1e-12) {
        throw UndefinedMetric("CE is undefined: optimal ranking is no better than random");
    }
    return (model_area - random_area) / denom;
}

double ce_pi(std::span<const ScoredFile> files, double pi) {
    const auto ordering = rank_by_density(files);
    return ce_pi_for_ordering(ordering, pi);
}

double acc_at_effort(std::span<const ScoredFile> files, double effort) {
    std::size_t defective = 0;
    double loc_total = 0.0;
    for (const auto& f : files) {
        defective += f.bugs > 0 ? 1 : 0;
        loc_total += static_cast<double>(f.loc);
    }
    if (defective == 0) {
        throw UndefinedMetric("ACC is undefined without defective files");
    }
    const double budget = effort * loc_total * (1.0 + 1e-12);
    double loc_sum = 0.0;
    std::size_t found = 0;
    for (const auto& f : rank_by_density(files)) {
        loc_sum += static_cast<double>(f.loc);
        if (loc_sum > budget) {
            break;
        }
        found += f.bugs > 0 ? 1 : 0;
    }
    return static_cast<double>(found) / static_cast<double>(defective);
}

double auc(std::span<const std::pair<double, int>> scores) {
    std::vector<std::pair<double, int>> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].first == sorted[i].first) {
            ++j;
        }
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (sorted[k].second == 1) {
                rank_sum_pos += mid_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = sorted.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetric("AUC needs both positive and negative samples");
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

CeReport evaluate(std::span<const ScoredFile> files, std::size_t loc_adjusted) {
    CeReport report;
    const auto ordering = rank_by_density(files);
    for (std::size_t i = 0; i < kCePoints.size(); ++i) {
        report.ce[i] = ce_pi_for_ordering(ordering, kCePoints[i]);
    }
    report.acc = acc_at_effort(files, 0.2);
    std::vector<std::pair<double, int>> labeled;
    labeled.reserve(files.size());
    for (const auto& f : files) {
        labeled.emplace_back(f.score, f.bugs > 0 ? 1 : 0);
    }
    report.auc = auc(labeled);
    report.loc_adjusted = loc_adjusted;
    return report;
}

void write_curve_csv(std::ostream& out, const CeCurve& curve) {
    out << "loc_fraction,bug_fraction\n";
    for (const auto& p : curve.points) {
        out << csv::format_double(p.loc_fraction) << ',' << csv::format_double(p.bug_fraction) << '\n';
    }
}

} // namespace hvsm::eval
