#include "fixtures.hpp"

#include "hvsm/random.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

namespace hvsm::testing {

namespace {

// Presence per file over the five versions.
constexpr bool kPresence[7][5] = {
    {true, true, true, true, true},    // spade
    {false, true, true, true, true},   // heart
    {false, false, true, true, false}, // diamond
    {false, false, false, true, true}, // club
    {true, true, true, false, false},  // square
    {true, true, false, false, false}, // triangle
    {false, true, true, false, false}, // nabla
};

} // namespace

double toy_metric(std::size_t vi, std::size_t file, std::size_t m) {
    return static_cast<double>(100 * vi + 10 * file + m);
}

ProjectHistory lifecycle_toy_project() {
    auto schema = std::make_shared<const Schema>(
        Schema{"loc", "m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9"});
    const std::vector<std::string> ids = {"v-3", "v-2", "v-1", "v", "v+1"};
    std::vector<VersionSnapshot> versions;
    for (std::size_t vi = 0; vi < ids.size(); ++vi) {
        VersionSnapshot snap;
        snap.version_id = ids[vi];
        for (std::size_t f = 0; f < kToyFiles.size(); ++f) {
            if (!kPresence[f][vi]) {
                continue;
            }
            std::vector<double> values;
            for (std::size_t m = 0; m < schema->size(); ++m) {
                values.push_back(toy_metric(vi, f, m));
            }
            FileKey key(kToyFiles[f]);
            snap.files.emplace(key, MetricVector(schema, std::move(values)));
            snap.labels.emplace(key, (f + vi) % 3 == 0 ? 2 : 0);
        }
        versions.push_back(std::move(snap));
    }
    return ProjectHistory("toy", std::move(versions));
}

ProjectHistory trend_project(std::size_t files, std::uint64_t seed, std::size_t versions, const std::string& name) {
    auto schema = std::make_shared<const Schema>(Schema{"loc", "trend", "noise_a", "noise_b", "noise_c"});
    Rng rng(seed);
    std::vector<VersionSnapshot> snaps(versions);
    for (std::size_t v = 0; v < versions; ++v) {
        snaps[v].version_id = std::to_string(v + 1);
    }
    const double p_up = 1.0 / std::sqrt(2.0);
    for (std::size_t f = 0; f < files; ++f) {
        std::vector<double> x(versions);
        std::vector<bool> up(versions, false); // up[v]: x[v] > x[v-1]
        x[versions - 1] = rng.uniform(0.0, 1.0);
        for (std::size_t v = versions - 1; v > 0; --v) {
            up[v] = rng.uniform01() < p_up;
            const double step = rng.uniform(0.05, 0.5);
            x[v - 1] = up[v] ? x[v] - step : x[v] + step;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "pkg.File%04zu", f);
        const FileKey key(buf);
        for (std::size_t v = 0; v < versions; ++v) {
            const bool buggy = v >= 2 && up[v] && up[v - 1];
            const std::uint64_t bugs = buggy ? 1 + rng.below(3) : 0;
            const double loc = std::floor(rng.uniform(50.0, 500.0));
            std::vector<double> values = {loc, x[v], rng.normal(), rng.normal(), rng.normal()};
            snaps[v].files.emplace(key, MetricVector(schema, std::move(values)));
            snaps[v].labels.emplace(key, bugs);
        }
    }
    return ProjectHistory(name, std::move(snaps));
}

} // namespace hvsm::testing
