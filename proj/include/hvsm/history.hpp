#pragma once

#include "hvsm/dataset.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hvsm {

enum class FileLifecycle { Developing, Newborn, Dead };

std::string_view to_string(FileLifecycle state) noexcept;

/// Lifecycle of `key` at version `v`. Throws InvalidArgument if `v` is unknown
/// or the file does not exist in any version up to and including `v`.
FileLifecycle classify_file(const ProjectHistory& history, std::string_view v, const FileKey& key);

struct LifecycleCounts {
    std::size_t developing = 0;
    std::size_t newborn = 0;
    std::size_t dead = 0;

    /// Share of the version's files that are developing files.
    double developing_fraction() const noexcept {
        const auto present = developing + newborn;
        return present ? static_cast<double>(developing) / static_cast<double>(present) : 0.0;
    }
};

LifecycleCounts lifecycle_counts(const ProjectHistory& history, std::string_view v);

/// A file's metrics over consecutive versions ending at the anchor version.
struct Hvsm {
    FileKey key;
    std::vector<std::string> version_ids;
    std::vector<MetricVector> sequence;
    std::optional<int> label; ///< binarized; empty when the anchor has no label for the file
    std::uint64_t bugs = 0;   ///< raw bug count at the anchor version

    std::size_t length() const noexcept { return sequence.size(); }
    const MetricVector& last() const { return sequence.back(); }
};

struct HvsmSet {
    std::string anchor_version;
    std::size_t len = 0;
    std::vector<Hvsm> items; ///< sorted by key

    std::size_t m() const noexcept { return items.size(); }
    double mean_length() const noexcept;
};

/// One sequence per file present at `v`. A file's sequence starts at the
/// earliest version inside the trailing `len`-version window from which it is
/// present in every version up to `v`.
HvsmSet extract_hvsm_set(const ProjectHistory& history, std::string_view v, std::size_t len);

/// Per-dimension z-score transform. Constant dimensions keep std = 1.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(Schema schema, std::vector<double> mean, std::vector<double> stddev);

    /// Population mean/std over every vector. Throws InvalidArgument when empty or schemas differ.
    static Normalizer fit(std::span<const MetricVector* const> vectors);

    const Schema& schema() const noexcept { return schema_; }
    const std::vector<double>& mean() const noexcept { return mean_; }
    const std::vector<double>& stddev() const noexcept { return stddev_; }

    /// Normalized copy; `loc()` keeps the raw line count. Throws on schema mismatch.
    MetricVector apply(const MetricVector& mv) const;
    void apply_in_place(std::span<double> values) const;

    static Normalizer identity(Schema schema);

private:
    Schema schema_;
    SchemaPtr shared_schema_;
    std::vector<double> mean_;
    std::vector<double> stddev_;
};

Normalizer fit_normalizer(const HvsmSet& train);
HvsmSet apply_normalizer(const Normalizer& n, const HvsmSet& s);

/// Debug dump: one row per (file, step).
void write_hvsm_csv(std::ostream& out, const HvsmSet& set);

} // namespace hvsm
