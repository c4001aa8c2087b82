#include <doctest.h>

#include "support/oracles.hpp"

#include "hvsm/effort_eval.hpp"
#include "hvsm/error.hpp"
#include "hvsm/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace hvsm;
using namespace hvsm::eval;

namespace {

std::vector<ScoredFile> example_files() {
    return {
        make_scored_file(FileKey("f1"), 0.9, 100, 2),
        make_scored_file(FileKey("f2"), 0.5, 500, 0),
        make_scored_file(FileKey("f3"), 0.4, 400, 2),
    };
}

std::vector<std::string> keys(std::span<const ScoredFile> files) {
    std::vector<std::string> out;
    for (const auto& f : files) {
        out.push_back(f.key.str());
    }
    return out;
}

std::vector<ScoredFile> to_scored(const std::vector<testing::OracleFile>& files) {
    std::vector<ScoredFile> out;
    for (const auto& f : files) {
        out.push_back(make_scored_file(FileKey(f.key), static_cast<double>(f.score_eighths) / 8.0,
                                       static_cast<std::uint64_t>(f.loc), static_cast<std::uint64_t>(f.bugs)));
    }
    return out;
}

} // namespace

TEST_CASE("density ranking and the curve of the worked example") {
    const auto files = example_files();
    const auto ranked = rank_by_density(files);
    CHECK(keys(ranked) == std::vector<std::string>{"f1", "f3", "f2"});

    const auto curve = ce_curve(ranked);
    REQUIRE(curve.points.size() == 4);
    const double expect[4][2] = {{0, 0}, {0.1, 0.5}, {0.5, 1.0}, {1.0, 1.0}};
    for (int i = 0; i < 4; ++i) {
        CHECK(curve.points[i].loc_fraction == doctest::Approx(expect[i][0]).epsilon(1e-15));
        CHECK(curve.points[i].bug_fraction == doctest::Approx(expect[i][1]).epsilon(1e-15));
    }
    CHECK(keys(rank_optimal(files)) == std::vector<std::string>{"f1", "f3", "f2"});
    CHECK(ce_pi(files, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CE at full effort for a worse ranking") {
    // Model ranks the clean file second: f1 (0.1, 0.5), f2 (0.6, 0.5), f3 (1, 1).
    std::vector<ScoredFile> files = {
        make_scored_file(FileKey("f1"), 0.9, 100, 2),
        make_scored_file(FileKey("f2"), 0.5, 500, 0),
        make_scored_file(FileKey("f3"), 0.1, 400, 2),
    };
    CHECK(keys(rank_by_density(files)) == std::vector<std::string>{"f1", "f2", "f3"});
    // Model area 0.025 + 0.25 + 0.3 = 0.575, optimal 0.825.
    CHECK(ce_pi(files, 1.0) == doctest::Approx((0.575 - 0.5) / (0.825 - 0.5)).epsilon(1e-12));
    CHECK(ce_pi(files, 1.0) == doctest::Approx(0.2308).epsilon(1e-4));
}

TEST_CASE("density ties go to the smaller file") {
    const std::vector<ScoredFile> files = {
        make_scored_file(FileKey("f1"), 0.9, 10, 0),
        make_scored_file(FileKey("f2"), 0.9, 90, 0),
        make_scored_file(FileKey("f3"), 0.1, 10, 0),
    };
    CHECK(keys(rank_by_density(files)) == std::vector<std::string>{"f1", "f3", "f2"});
    const std::vector<ScoredFile> same_score = {
        make_scored_file(FileKey("big"), 0.5, 100, 0),
        make_scored_file(FileKey("small"), 0.5, 10, 0),
    };
    CHECK(rank_by_density(same_score).front().key.str() == "small");
    CHECK(rank_by_density(std::span<const ScoredFile>(files.data(), 1)).size() == 1);
}

TEST_CASE("area interpolates at pi") {
    CeCurve c;
    c.points = {{0, 0}, {0.1, 0.5}, {0.2, 0.5}, {1, 1}};
    CHECK(area_up_to(c, 0.1) == doctest::Approx(0.025));
    CHECK(area_up_to(c, 0.2) == doctest::Approx(0.075));
    CHECK(area_up_to(c, 1.0) == doctest::Approx(0.075 + 0.6));
    CHECK(area_up_to(c, 0.6) == doctest::Approx(0.075 + 0.4 * (0.5 + 0.75) / 2));
}

TEST_CASE("CE with the curve (0,0),(0.1,0.5),(0.2,0.5),(1,1)") {
    // Files: A loc 10 bugs 1 density top, B loc 10 clean, C loc 80 bugs 1.
    std::vector<ScoredFile> files = {
        make_scored_file(FileKey("A"), 0.9, 10, 1),
        make_scored_file(FileKey("B"), 0.8, 10, 0),
        make_scored_file(FileKey("C"), 0.1, 80, 1),
    };
    const auto curve = ce_curve(rank_by_density(files));
    REQUIRE(curve.points.size() == 4);
    CHECK(curve.points[2].loc_fraction == doctest::Approx(0.2));
    CHECK(curve.points[2].bug_fraction == doctest::Approx(0.5));
    // Optimal: A, C, B -> (0.1, .5), (0.9, 1), (1, 1): area 0.025 + 0.6 + 0.1 = 0.725.
    CHECK(ce_pi(files, 1.0) == doctest::Approx((0.675 - 0.5) / (0.725 - 0.5)).epsilon(1e-12));
    CHECK(ce_pi(files, 1.0) == doctest::Approx(0.7778).epsilon(1e-4));
}

TEST_CASE("CE agrees with the brute-force oracle") {
    Rng rng(2024);
    for (int instance = 0; instance < 200; ++instance) {
        std::vector<testing::OracleFile> files;
        const std::size_t n = 1 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            files.push_back({"k" + std::to_string(i), static_cast<std::int64_t>(rng.below(9)),
                             static_cast<std::int64_t>(1 + rng.below(300)),
                             rng.uniform01() < 0.4 ? static_cast<std::int64_t>(1 + rng.below(5)) : 0});
        }
        const auto scored = to_scored(files);
        for (double pi : kCePoints) {
            double expected = 0;
            try {
                expected = testing::brute_force_ce(files, pi);
            } catch (const std::exception&) {
                CHECK_THROWS_AS(ce_pi(scored, pi), UndefinedMetric);
                continue;
            }
            CHECK(std::fabs(ce_pi(scored, pi) - expected) <= 1e-12);
        }
    }
}

TEST_CASE("CE bounds: optimal is 1, random is about 0, reverse optimal is at most 0") {
    Rng rng(77);
    for (int instance = 0; instance < 50; ++instance) {
        std::vector<ScoredFile> files;
        std::vector<ScoredFile> reversed;
        for (int i = 0; i < 30; ++i) {
            const auto loc = 1 + rng.below(200);
            const auto bugs = rng.uniform01() < 0.5 ? rng.below(4) : 0;
            const double density = static_cast<double>(bugs) / static_cast<double>(loc);
            files.push_back(make_scored_file(FileKey("f" + std::to_string(i)), density * static_cast<double>(loc), loc, bugs));
            reversed.push_back(make_scored_file(FileKey("f" + std::to_string(i)), -density * static_cast<double>(loc), loc, bugs));
        }
        const bool any = std::any_of(files.begin(), files.end(), [](const auto& f) { return f.bugs > 0; });
        if (!any) {
            continue;
        }
        for (double pi : kCePoints) {
            try {
                CHECK(ce_pi(files, pi) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(ce_pi(reversed, pi) <= 1e-12);
            } catch (const UndefinedMetric&) {
            }
        }
    }
}

TEST_CASE("CE error cases") {
    auto files = example_files();
    CHECK_THROWS_AS(ce_pi(files, 0.0), InvalidArgument);
    CHECK_THROWS_AS(ce_pi(files, 1.5), InvalidArgument);
    for (auto& f : files) {
        f.bugs = 0;
    }
    CHECK_THROWS_AS(ce_pi(files, 1.0), UndefinedMetric);
    CHECK_THROWS_AS(ce_pi(std::vector<ScoredFile>{}, 1.0), InvalidArgument);
}

TEST_CASE("loc zero is counted as one") {
    bool adjusted = false;
    const auto f = make_scored_file(FileKey("z"), 0.5, 0, 1, &adjusted);
    CHECK(f.loc == 1);
    CHECK(adjusted);
    make_scored_file(FileKey("z"), 0.5, 3, 1, &adjusted);
    CHECK_FALSE(adjusted);
}

TEST_CASE("ACC counts only fully inspected files") {
    // 20% of 1000 LOC = 200.
    std::vector<ScoredFile> files = {
        make_scored_file(FileKey("a"), 0.9, 100, 1), // density .009
        make_scored_file(FileKey("b"), 0.5, 100, 0), // .005
        make_scored_file(FileKey("c"), 0.4, 200, 1), // .002 -> would exceed the budget
        make_scored_file(FileKey("d"), 0.1, 600, 0),
    };
    CHECK(acc_at_effort(files, 0.2) == doctest::Approx(0.5));

    std::vector<ScoredFile> exact = {
        make_scored_file(FileKey("a"), 0.8, 100, 1),
        make_scored_file(FileKey("b"), 0.5, 100, 1),
        make_scored_file(FileKey("c"), 0.1, 600, 1),
        make_scored_file(FileKey("d"), 0.0, 200, 1),
    };
    CHECK(acc_at_effort(exact, 0.2) == doctest::Approx(0.5));
}

TEST_CASE("AUC") {
    const std::vector<std::pair<double, int>> s = {{0.9, 1}, {0.8, 0}, {0.7, 1}, {0.1, 0}};
    CHECK(auc(s) == doctest::Approx(0.75));
    const std::vector<std::pair<double, int>> tied = {{0.5, 1}, {0.5, 0}};
    CHECK(auc(tied) == doctest::Approx(0.5));
    const std::vector<std::pair<double, int>> one = {{0.5, 1}, {0.4, 1}};
    CHECK_THROWS_AS(auc(one), UndefinedMetric);

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::pair<double, int>> scores;
        for (std::size_t i = 0, n = 2 + rng.below(50); i < n; ++i) {
            scores.emplace_back(static_cast<double>(rng.below(6)) / 5.0, static_cast<int>(rng.below(2)));
        }
        scores[0].second = 0;
        scores[1].second = 1;
        CHECK(std::fabs(auc(scores) - testing::brute_force_auc(scores)) < 1e-12);
    }
}

TEST_CASE("evaluate and curve export") {
    const auto files = example_files();
    const auto r = evaluate(files);
    CHECK(r.ce[3] == doctest::Approx(1.0));
    CHECK(r.auc == doctest::Approx(0.5));
    std::ostringstream out;
    write_curve_csv(out, ce_curve(rank_by_density(files)));
    CHECK(out.str().starts_with("loc_fraction,bug_fraction\n0,0\n"));
}
