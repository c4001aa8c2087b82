#include "hvsm/stats.hpp"

#include "hvsm/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hvsm::stats {

namespace {

struct SignedRanks {
    std::vector<double> ranks;     ///< average ranks of |d|
    std::vector<bool> positive;
    std::vector<std::size_t> ties; ///< sizes of tie groups
};

SignedRanks rank_differences(std::span<const double> a, std::span<const double> b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        if (diff != 0.0) {
            d.push_back(diff);
        }
    }
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::fabs(d[x]) < std::fabs(d[y]); });

    SignedRanks out;
    out.ranks.resize(d.size());
    out.positive.resize(d.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && std::fabs(d[order[j]]) == std::fabs(d[order[i]])) {
            ++j;
        }
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            out.ranks[order[k]] = avg;
        }
        out.ties.push_back(j - i);
        i = j;
    }
    for (std::size_t k = 0; k < d.size(); ++k) {
        out.positive[k] = d[k] > 0;
    }
    return out;
}

// Two-sided p from the exact distribution of W+ over all 2^n sign patterns.
// Average ranks are multiples of 1/2, so the DP runs over doubled ranks.
double exact_p(const std::vector<double>& ranks, double w_plus) {
    std::vector<long long> doubled;
    long long max_sum = 0;
    for (double r : ranks) {
        doubled.push_back(std::llround(2 * r));
        max_sum += doubled.back();
    }
    std::vector<double> count(static_cast<std::size_t>(max_sum) + 1, 0.0);
    count[0] = 1.0;
    long long reach = 0;
    for (long long r : doubled) {
        for (long long s = reach; s >= 0; --s) {
            count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
        }
        reach += r;
    }
    const long long w = std::llround(2 * w_plus);
    double lower = 0.0;
    double upper = 0.0;
    for (long long s = 0; s <= max_sum; ++s) {
        if (s <= w) {
            lower += count[static_cast<std::size_t>(s)];
        }
        if (s >= w) {
            upper += count[static_cast<std::size_t>(s)];
        }
    }
    const double total = std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

double normal_p(const SignedRanks& sr, double w_plus) {
    const double n = static_cast<double>(sr.ranks.size());
    const double mean = n * (n + 1) / 4.0;
    double var = n * (n + 1) * (2 * n + 1) / 24.0;
    for (std::size_t t : sr.ties) {
        const double tt = static_cast<double>(t);
        var -= (tt * tt * tt - tt) / 48.0;
    }
    if (var <= 0) {
        return 1.0;
    }
    const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::numbers::sqrt2));
}

} // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("paired samples must have equal length");
    }
    if (a.empty()) {
        throw InvalidArgument("paired samples must be non-empty");
    }
    const SignedRanks sr = rank_differences(a, b);
    WilcoxonResult r;
    r.n = sr.ranks.size();
    if (r.n == 0) {
        r.degenerate = true;
        r.p_value = 1.0;
        r.exact = true;
        return r;
    }
    for (std::size_t k = 0; k < r.n; ++k) {
        if (sr.positive[k]) {
            r.w_plus += sr.ranks[k];
        }
    }
    r.exact = r.n <= kWilcoxonExactLimit;
    r.p_value = r.exact ? exact_p(sr.ranks, r.w_plus) : normal_p(sr, r.w_plus);
    return r;
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw InvalidArgument("Cliff's delta needs two non-empty samples");
    }
    long long greater = 0;
    long long less = 0;
    for (double x : a) {
        for (double y : b) {
            greater += x > y;
            less += x < y;
        }
    }
    return static_cast<double>(greater - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
    case Outcome::Win:
        return "win";
    case Outcome::Tie:
        return "tie";
    case Outcome::Loss:
        return "loss";
    }
    return "?";
}

Outcome wtl_decision(double p_value, double delta) noexcept {
    if (p_value < kSignificance && delta >= kNegligibleDelta) {
        return Outcome::Win;
    }
    if (p_value < kSignificance && -delta >= kNegligibleDelta) {
        return Outcome::Loss;
    }
    return Outcome::Tie;
}

WtlResult win_tie_loss(std::span<const double> first, std::span<const double> second) {
    WtlResult r;
    r.p_value = wilcoxon_signed_rank(first, second).p_value;
    r.delta = cliffs_delta(first, second);
    r.outcome = wtl_decision(r.p_value, r.delta);
    return r;
}

double chi_squared_critical(double df, double alpha) {
    boost::math::chi_squared_distribution<double> dist(df);
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

std::optional<std::size_t> SkGrouping::rank_of(std::string_view technique) const {
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (std::find(ranks[i].begin(), ranks[i].end(), technique) != ranks[i].end()) {
            return i + 1;
        }
    }
    return std::nullopt;
}

namespace {

struct SkContext {
    std::vector<std::string> names; ///< descending mean
    std::vector<double> means;
    double error_var_of_mean = 0.0; ///< s^2 / n
    double error_df = 0.0;          ///< nu
    double alpha = 0.05;
    std::vector<std::vector<std::string>> ranks;
};

void sk_split(SkContext& ctx, std::size_t lo, std::size_t hi) {
    const std::size_t k = hi - lo;
    auto emit = [&] { ctx.ranks.emplace_back(ctx.names.begin() + static_cast<std::ptrdiff_t>(lo),
                                             ctx.names.begin() + static_cast<std::ptrdiff_t>(hi)); };
    if (k < 2) {
        emit();
        return;
    }
    const double grand = std::accumulate(ctx.means.begin() + static_cast<std::ptrdiff_t>(lo),
                                         ctx.means.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                         static_cast<double>(k);

    // Maximize the between-group sum of squares over contiguous splits.
    double best_b0 = 0.0;
    std::size_t best_cut = 0;
    double left_sum = 0.0;
    for (std::size_t cut = lo + 1; cut < hi; ++cut) {
        left_sum += ctx.means[cut - 1];
        if (ctx.means[cut - 1] == ctx.means[cut]) {
            continue; // never separate equal means
        }
        const double k1 = static_cast<double>(cut - lo);
        const double k2 = static_cast<double>(hi - cut);
        const double m1 = left_sum / k1;
        const double m2 = (grand * static_cast<double>(k) - left_sum) / k2;
        const double b0 = k1 * (m1 - grand) * (m1 - grand) + k2 * (m2 - grand) * (m2 - grand);
        if (b0 > best_b0) {
            best_b0 = b0;
            best_cut = cut;
        }
    }
    if (best_cut == 0 || !(best_b0 > 0)) {
        emit();
        return;
    }

    double ss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        ss += (ctx.means[i] - grand) * (ctx.means[i] - grand);
    }
    const double kd = static_cast<double>(k);
    const double sigma2 = (ss + ctx.error_df * ctx.error_var_of_mean) / (kd + ctx.error_df);
    const double pi = std::numbers::pi;
    const double lambda = pi / (2.0 * (pi - 2.0)) * best_b0 / sigma2;
    const double critical = chi_squared_critical(kd / (pi - 2.0), ctx.alpha);
    if (!(lambda > critical)) {
        emit();
        return;
    }
    sk_split(ctx, lo, best_cut);
    sk_split(ctx, best_cut, hi);
}

} // namespace

SkGrouping scott_knott(const std::map<std::string, std::vector<double>>& values, double alpha) {
    SkGrouping out;
    if (values.empty()) {
        return out;
    }
    if (!(alpha > 0 && alpha < 1)) {
        throw InvalidArgument("alpha must lie in (0, 1)");
    }
    const std::size_t n = values.begin()->second.size();
    if (n == 0) {
        throw InvalidArgument("Scott-Knott needs at least one value per technique");
    }
    std::vector<std::pair<std::string, double>> ordered;
    double within = 0.0;
    for (const auto& [name, v] : values) {
        if (v.size() != n) {
            throw InvalidArgument("Scott-Knott value vectors must have equal length");
        }
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
        for (double x : v) {
            within += (x - mean) * (x - mean);
        }
        out.means[name] = mean;
        ordered.emplace_back(name, mean);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });

    SkContext ctx;
    ctx.alpha = alpha;
    for (auto& [name, mean] : ordered) {
        ctx.names.push_back(name);
        ctx.means.push_back(mean);
    }
    const double k = static_cast<double>(ordered.size());
    ctx.error_df = k * static_cast<double>(n - 1);
    if (ctx.error_df > 0) {
        ctx.error_var_of_mean = within / ctx.error_df / static_cast<double>(n);
    }
    sk_split(ctx, 0, ctx.names.size());
    out.ranks = std::move(ctx.ranks);
    return out;
}

} // namespace hvsm::stats
