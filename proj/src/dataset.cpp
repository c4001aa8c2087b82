#include "hvsm/dataset.hpp"

#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace hvsm {

FileKey::FileKey(std::string_view path) : path_(csv::trim(path)) {
    if (path_.empty()) {
        throw InvalidArgument("empty file key");
    }
}

const Schema& promise_code_metrics() {
    static const Schema names = {"wmc", "dit", "noc", "cbo",  "rfc", "lcom", "ca",  "ce",     "npm",   "lcom3",
                                 "loc", "dam", "moa", "mfa", "cam", "ic",   "cbm", "amc", "max_cc", "avg_cc"};
    return names;
}

const Schema& process_metric_names() {
    static const Schema names = {"add", "del", "cadd", "cdel"};
    return names;
}

MetricVector::MetricVector(SchemaPtr schema, std::vector<double> values, std::optional<std::uint64_t> loc)
    : schema_(std::move(schema)), values_(std::move(values)) {
    if (!schema_) {
        throw InvalidArgument("metric vector without schema");
    }
    if (schema_->size() != values_.size()) {
        throw InvalidArgument("metric vector has " + std::to_string(values_.size()) + " values but schema has " +
                              std::to_string(schema_->size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("non-finite value for metric '" + (*schema_)[i] + "'");
        }
    }
    if (loc) {
        loc_ = *loc;
        return;
    }
    const auto it = std::find(schema_->begin(), schema_->end(), "loc");
    if (it != schema_->end()) {
        const double loc = values_[static_cast<std::size_t>(it - schema_->begin())];
        if (loc < 0) {
            throw InvalidArgument("negative loc");
        }
        loc_ = static_cast<std::uint64_t>(std::llround(loc));
    }
}

bool same_schema(const MetricVector& a, const MetricVector& b) {
    return a.schema_ptr() == b.schema_ptr() || a.schema() == b.schema();
}

ProjectHistory::ProjectHistory(std::string name, std::vector<VersionSnapshot> versions)
    : name_(std::move(name)), versions_(std::move(versions)) {
    std::set<std::string> seen;
    for (const auto& v : versions_) {
        if (!seen.insert(v.version_id).second) {
            throw InvalidArgument("duplicate version id '" + v.version_id + "' in project " + name_);
        }
        for (const auto& [key, bugs] : v.labels) {
            if (!v.files.contains(key)) {
                throw InvalidArgument("label for unknown file '" + key.str() + "' in version " + v.version_id);
            }
        }
    }
}

std::optional<std::size_t> ProjectHistory::find(std::string_view version_id) const {
    for (std::size_t i = 0; i < versions_.size(); ++i) {
        if (versions_[i].version_id == version_id) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t ProjectHistory::index_of(std::string_view version_id) const {
    if (auto i = find(version_id)) {
        return *i;
    }
    throw InvalidArgument("unknown version '" + std::string(version_id) + "' in project " + name_);
}

namespace {

std::size_t require_column(const csv::Row& header, std::string_view name, bool last) {
    std::optional<std::size_t> found;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (csv::trim(header[i]) == name) {
            found = i;
            if (!last) {
                break;
            }
        }
    }
    if (!found) {
        throw ParseError("missing required column '" + std::string(name) + "'", 1);
    }
    return *found;
}

std::uint64_t parse_count(const std::string& cell, std::size_t row, std::size_t col, std::string_view what) {
    const auto v = csv::parse_int(cell);
    if (!v || *v < 0) {
        throw ParseError("invalid " + std::string(what) + " '" + cell + "' at row " + std::to_string(row) +
                             ", column " + std::to_string(col),
                         row, col);
    }
    return static_cast<std::uint64_t>(*v);
}

} // namespace

VersionSnapshot parse_metrics_csv(std::istream& in, const Schema& schema, std::string version_id,
                                  const MetricsCsvOptions& options) {
    csv::Reader reader(in);
    const auto header = reader.next();
    if (!header) {
        throw ParseError("missing header row", 1);
    }
    const std::size_t key_col = require_column(*header, options.key_column, true);
    const std::size_t bug_col = require_column(*header, options.bug_column, false);
    std::vector<std::size_t> metric_cols;
    metric_cols.reserve(schema.size());
    for (const auto& name : schema) {
        metric_cols.push_back(require_column(*header, name, false));
    }

    auto shared_schema = std::make_shared<const Schema>(schema);
    VersionSnapshot snap;
    snap.version_id = std::move(version_id);

    while (auto row = reader.next()) {
        const std::size_t line = reader.line();
        if (row->size() != header->size()) {
            throw ParseError("row " + std::to_string(line) + " has " + std::to_string(row->size()) +
                                 " fields, header has " + std::to_string(header->size()),
                             line);
        }
        const std::string key_text = csv::trim((*row)[key_col]);
        if (key_text.empty()) {
            throw ParseError("empty file name at row " + std::to_string(line), line, key_col + 1);
        }
        FileKey key(key_text);

        std::vector<double> values;
        values.reserve(schema.size());
        for (std::size_t m = 0; m < schema.size(); ++m) {
            const std::size_t col = metric_cols[m];
            const auto v = csv::parse_double((*row)[col]);
            if (!v) {
                throw ParseError("non-numeric value '" + (*row)[col] + "' for metric '" + schema[m] + "' at row " +
                                     std::to_string(line) + ", column " + std::to_string(col + 1),
                                 line, col + 1);
            }
            values.push_back(*v);
        }
        const std::uint64_t bugs = parse_count((*row)[bug_col], line, bug_col + 1, "bug count");

        MetricVector mv;
        try {
            mv = MetricVector(shared_schema, std::move(values));
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string(e.what()) + " at row " + std::to_string(line), line);
        }
        if (!snap.files.emplace(key, std::move(mv)).second) {
            throw ParseError("duplicate file '" + key.str() + "' at row " + std::to_string(line), line, key_col + 1);
        }
        snap.labels.emplace(std::move(key), bugs);
    }
    return snap;
}

void write_metrics_csv(std::ostream& out, const VersionSnapshot& snapshot) {
    const Schema* schema = nullptr;
    if (!snapshot.files.empty()) {
        schema = &snapshot.files.begin()->second.schema();
    }
    csv::Row header{"name"};
    if (schema) {
        header.insert(header.end(), schema->begin(), schema->end());
    }
    header.push_back("bug");
    out << csv::join(header) << '\n';
    for (const auto& [key, mv] : snapshot.files) {
        csv::Row row{key.str()};
        for (double v : mv.values()) {
            row.push_back(csv::format_double(v));
        }
        const auto it = snapshot.labels.find(key);
        row.push_back(std::to_string(it == snapshot.labels.end() ? 0 : it->second));
        out << csv::join(row) << '\n';
    }
}

void parse_process_csv(std::istream& in, ChurnTable& table) {
    csv::Reader reader(in);
    const auto header = reader.next();
    if (!header) {
        throw ParseError("missing header row", 1);
    }
    const std::size_t version_col = require_column(*header, "version", false);
    const std::size_t key_col = require_column(*header, "name", true);
    const std::size_t add_col = require_column(*header, "add", false);
    const std::size_t del_col = require_column(*header, "del", false);
    while (auto row = reader.next()) {
        const std::size_t line = reader.line();
        if (row->size() != header->size()) {
            throw ParseError("row " + std::to_string(line) + " has wrong number of fields", line);
        }
        const std::string key_text = csv::trim((*row)[key_col]);
        if (key_text.empty()) {
            throw ParseError("empty file name at row " + std::to_string(line), line, key_col + 1);
        }
        auto entry = std::make_pair(csv::trim((*row)[version_col]), FileKey(key_text));
        const auto add = parse_count((*row)[add_col], line, add_col + 1, "add");
        const auto del = parse_count((*row)[del_col], line, del_col + 1, "del");
        if (!table.emplace(std::move(entry), std::make_pair(add, del)).second) {
            throw ParseError("duplicate churn entry at row " + std::to_string(line), line);
        }
    }
}

std::map<std::pair<std::string, FileKey>, ProcessMetrics>
compute_process_metrics(const ProjectHistory& history, const ChurnTable& churn) {
    for (const auto& [entry, counts] : churn) {
        const auto& [version, key] = entry;
        const auto idx = history.find(version);
        if (!idx) {
            throw InvalidArgument("process metrics reference unknown version '" + version + "'");
        }
        if (!history.versions()[*idx].files.contains(key)) {
            throw InvalidArgument("process metrics reference unknown file '" + key.str() + "' in version " + version);
        }
    }

    std::map<std::pair<std::string, FileKey>, ProcessMetrics> out;
    std::map<FileKey, ProcessMetrics> running;
    for (const auto& version : history.versions()) {
        for (const auto& [key, mv] : version.files) {
            ProcessMetrics pm;
            if (auto it = churn.find({version.version_id, key}); it != churn.end()) {
                pm.add = it->second.first;
                pm.del = it->second.second;
            }
            auto& acc = running[key];
            pm.cadd = acc.cadd + pm.add;
            pm.cdel = acc.cdel + pm.del;
            acc = pm;
            out.emplace(std::make_pair(version.version_id, key), pm);
        }
    }
    return out;
}

ProjectHistory attach_process_metrics(const ProjectHistory& history, const ChurnTable& churn) {
    const auto process = compute_process_metrics(history, churn);

    std::map<const Schema*, SchemaPtr> extended;
    auto extend = [&](const MetricVector& mv) {
        auto& ptr = extended[mv.schema_ptr().get()];
        if (!ptr) {
            Schema s = mv.schema();
            s.insert(s.end(), process_metric_names().begin(), process_metric_names().end());
            ptr = std::make_shared<const Schema>(std::move(s));
        }
        return ptr;
    };

    std::vector<VersionSnapshot> versions;
    versions.reserve(history.size());
    for (const auto& version : history.versions()) {
        VersionSnapshot snap;
        snap.version_id = version.version_id;
        snap.labels = version.labels;
        for (const auto& [key, mv] : version.files) {
            const ProcessMetrics& pm = process.at({version.version_id, key});
            std::vector<double> values = mv.values();
            values.push_back(static_cast<double>(pm.add));
            values.push_back(static_cast<double>(pm.del));
            values.push_back(static_cast<double>(pm.cadd));
            values.push_back(static_cast<double>(pm.cdel));
            snap.files.emplace(key, MetricVector(extend(mv), std::move(values)));
        }
        versions.push_back(std::move(snap));
    }
    return ProjectHistory(history.name(), std::move(versions));
}

ProjectHistory load_project(const ProjectManifest& manifest, const Schema& schema, bool with_process,
                            const MetricsCsvOptions& options) {
    std::vector<VersionSnapshot> versions;
    ChurnTable churn;
    for (const auto& source : manifest.versions) {
        std::ifstream in(source.metrics_csv);
        if (!in) {
            throw Error("cannot open metrics file " + source.metrics_csv.string());
        }
        try {
            versions.push_back(parse_metrics_csv(in, schema, source.version_id, options));
        } catch (const ParseError& e) {
            throw ParseError(source.metrics_csv.string() + ": " + e.what(), e.row(), e.column());
        }
        if (with_process && source.process_csv) {
            std::ifstream pin(*source.process_csv);
            if (!pin) {
                throw Error("cannot open process metrics file " + source.process_csv->string());
            }
            try {
                parse_process_csv(pin, churn);
            } catch (const ParseError& e) {
                throw ParseError(source.process_csv->string() + ": " + e.what(), e.row(), e.column());
            }
        }
    }
    ProjectHistory history(manifest.name, std::move(versions));
    if (with_process) {
        history = attach_process_metrics(history, churn);
    }
    return history;
}

} // namespace hvsm
