#pragma once

#include "hvsm/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hvsm::testing {

/// Five versions "v-3" .. "v+1" with seven files covering every lifecycle state:
///   spade    v-3 .. v+1     heart  v-2 .. v+1     diamond v-1 .. v
///   club     v   .. v+1     square v-3 .. v-1     triangle v-3 .. v-2
///   nabla    v-2 .. v-1
/// Ten metrics per version (including loc). Metric values encode
/// (version index, file index) so sequences can be checked exactly.
ProjectHistory lifecycle_toy_project();

/// Value of metric `m` for file `file` in version index `vi` of the toy project.
double toy_metric(std::size_t vi, std::size_t file, std::size_t m);

inline const std::vector<std::string> kToyFiles = {"spade", "heart", "diamond", "club", "square", "triangle", "nabla"};

/// Versions "1" .. "<versions>" of `files` files present in every version.
/// Metrics: loc, trend, noise_a, noise_b, noise_c. From version 3 on, a file
/// is buggy at version k iff `trend` strictly increases over versions k-2..k.
/// Each series is built backwards from a U(0, 1) final value with independent
/// up/down steps (P(up) = 1/sqrt(2), so about half the files are buggy), which
/// makes the anchor version's `trend` independent of its label. loc and the
/// noise metrics are i.i.d.
ProjectHistory trend_project(std::size_t files, std::uint64_t seed, std::size_t versions = 3,
                             const std::string& name = "trend");

} // namespace hvsm::testing
