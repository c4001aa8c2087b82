#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hvsm {

/// Identity of a file across versions: directory path plus file name, or the
/// fully-qualified class name used by PROMISE tables. Case-sensitive.
class FileKey {
public:
    FileKey() = default;
    /// Trims surrounding whitespace; throws InvalidArgument when nothing is left.
    explicit FileKey(std::string_view path);

    const std::string& str() const noexcept { return path_; }

    auto operator<=>(const FileKey&) const = default;

private:
    std::string path_;
};

using Schema = std::vector<std::string>;
using SchemaPtr = std::shared_ptr<const Schema>;

/// The 20 PROMISE code metrics in their customary column order.
const Schema& promise_code_metrics();

/// ADD, DEL, CADD, CDEL column names appended by attach_process_metrics.
const Schema& process_metric_names();

/// One file's metrics in one version.
class MetricVector {
public:
    MetricVector() = default;
    /// Throws InvalidArgument if sizes differ, a value is non-finite, or LOC is negative.
    /// An explicit `loc` overrides the schema's `loc` column; transformed
    /// (e.g. z-scored) vectors use it to carry the raw line count.
    MetricVector(SchemaPtr schema, std::vector<double> values, std::optional<std::uint64_t> loc = std::nullopt);

    const std::vector<double>& values() const noexcept { return values_; }
    const Schema& schema() const noexcept { return *schema_; }
    const SchemaPtr& schema_ptr() const noexcept { return schema_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Lines of code, taken from the `loc` column; 0 when the schema has none.
    std::uint64_t loc() const noexcept { return loc_; }

private:
    SchemaPtr schema_;
    std::vector<double> values_;
    std::uint64_t loc_ = 0;
};

bool same_schema(const MetricVector& a, const MetricVector& b);

struct VersionSnapshot {
    std::string version_id;
    std::map<FileKey, MetricVector> files;
    std::map<FileKey, std::uint64_t> labels; ///< bug counts
};

/// Versions of one project in ascending release order. Order is fixed at construction.
class ProjectHistory {
public:
    ProjectHistory() = default;
    /// Throws InvalidArgument on duplicate version ids or labels for unknown files.
    ProjectHistory(std::string name, std::vector<VersionSnapshot> versions);

    const std::string& name() const noexcept { return name_; }
    const std::vector<VersionSnapshot>& versions() const noexcept { return versions_; }
    std::size_t size() const noexcept { return versions_.size(); }

    std::optional<std::size_t> find(std::string_view version_id) const;
    /// Throws InvalidArgument for an unknown id.
    std::size_t index_of(std::string_view version_id) const;
    const VersionSnapshot& at(std::string_view version_id) const { return versions_[index_of(version_id)]; }

private:
    std::string name_;
    std::vector<VersionSnapshot> versions_;
};

struct ProcessMetrics {
    std::uint64_t add = 0;
    std::uint64_t del = 0;
    std::uint64_t cadd = 0;
    std::uint64_t cdel = 0;
};

struct MetricsCsvOptions {
    std::string key_column = "name";
    std::string bug_column = "bug";
};

/// Reads a metrics table. Columns not named in `schema` (other than key and
/// bug) are ignored. When the key column name occurs more than once, the last
/// occurrence is the key (PROMISE files carry the project name in the first).
VersionSnapshot parse_metrics_csv(std::istream& in, const Schema& schema, std::string version_id,
                                  const MetricsCsvOptions& options = {});

/// Writes `name`, the snapshot's schema columns, then `bug`.
void write_metrics_csv(std::ostream& out, const VersionSnapshot& snapshot);

constexpr int binarize_label(std::uint64_t bug_count) noexcept { return bug_count > 0 ? 1 : 0; }

/// (version_id, file) → (lines added, lines deleted) since the previous release.
using ChurnTable = std::map<std::pair<std::string, FileKey>, std::pair<std::uint64_t, std::uint64_t>>;

/// Reads `version,name,add,del` rows into `table`. Duplicate entries are rejected.
void parse_process_csv(std::istream& in, ChurnTable& table);

/// Per-file process metrics in each version, accumulated over the versions the file exists in.
std::map<std::pair<std::string, FileKey>, ProcessMetrics>
compute_process_metrics(const ProjectHistory& history, const ChurnTable& churn);

/// Extends every MetricVector by [add, del, cadd, cdel]. Files missing from
/// `churn` in a version get add = del = 0 there.
ProjectHistory attach_process_metrics(const ProjectHistory& history, const ChurnTable& churn);

struct VersionSource {
    std::string version_id;
    std::filesystem::path metrics_csv;
    std::optional<std::filesystem::path> process_csv;
};

struct ProjectManifest {
    std::string name;
    std::vector<VersionSource> versions; ///< ascending release order
};

/// Loads every version listed in the manifest; appends process metrics when requested.
ProjectHistory load_project(const ProjectManifest& manifest, const Schema& schema, bool with_process,
                            const MetricsCsvOptions& options = {});

} // namespace hvsm
