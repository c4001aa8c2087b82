#include "hvsm/history.hpp"

#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <cmath>
#include <ostream>
#include <set>

namespace hvsm {

std::string_view to_string(FileLifecycle state) noexcept {
    switch (state) {
    case FileLifecycle::Developing:
        return "developing";
    case FileLifecycle::Newborn:
        return "newborn";
    case FileLifecycle::Dead:
        return "dead";
    }
    return "unknown";
}

namespace {

bool present_before(const ProjectHistory& history, std::size_t vi, const FileKey& key) {
    for (std::size_t i = 0; i < vi; ++i) {
        if (history.versions()[i].files.contains(key)) {
            return true;
        }
    }
    return false;
}

} // namespace

FileLifecycle classify_file(const ProjectHistory& history, std::string_view v, const FileKey& key) {
    const std::size_t vi = history.index_of(v);
    const bool now = history.versions()[vi].files.contains(key);
    const bool before = present_before(history, vi, key);
    if (now) {
        return before ? FileLifecycle::Developing : FileLifecycle::Newborn;
    }
    if (before) {
        return FileLifecycle::Dead;
    }
    throw InvalidArgument("file '" + key.str() + "' does not exist up to version " + std::string(v));
}

LifecycleCounts lifecycle_counts(const ProjectHistory& history, std::string_view v) {
    const std::size_t vi = history.index_of(v);
    std::set<FileKey> earlier;
    for (std::size_t i = 0; i < vi; ++i) {
        for (const auto& [key, mv] : history.versions()[i].files) {
            earlier.insert(key);
        }
    }
    LifecycleCounts counts;
    const auto& current = history.versions()[vi].files;
    for (const auto& [key, mv] : current) {
        if (earlier.contains(key)) {
            ++counts.developing;
        } else {
            ++counts.newborn;
        }
    }
    for (const auto& key : earlier) {
        if (!current.contains(key)) {
            ++counts.dead;
        }
    }
    return counts;
}

double HvsmSet::mean_length() const noexcept {
    if (items.empty()) {
        return 0.0;
    }
    std::size_t total = 0;
    for (const auto& h : items) {
        total += h.length();
    }
    return static_cast<double>(total) / static_cast<double>(items.size());
}

HvsmSet extract_hvsm_set(const ProjectHistory& history, std::string_view v, std::size_t len) {
    if (len == 0) {
        throw InvalidArgument("HVSM window length must be at least 1");
    }
    const std::size_t vi = history.index_of(v);
    const std::size_t window_start = vi + 1 >= len ? vi + 1 - len : 0;
    const auto& versions = history.versions();
    const auto& anchor = versions[vi];

    HvsmSet set;
    set.anchor_version = anchor.version_id;
    set.len = len;
    set.items.reserve(anchor.files.size());

    // std::map iteration gives lexicographic key order.
    for (const auto& [key, mv] : anchor.files) {
        // Walk back while the file stays present; a gap ends the sequence.
        std::size_t start = vi;
        while (start > window_start && versions[start - 1].files.contains(key)) {
            --start;
        }
        Hvsm h;
        h.key = key;
        for (std::size_t i = start; i <= vi; ++i) {
            h.version_ids.push_back(versions[i].version_id);
            h.sequence.push_back(versions[i].files.at(key));
        }
        if (auto it = anchor.labels.find(key); it != anchor.labels.end()) {
            h.bugs = it->second;
            h.label = binarize_label(it->second);
        }
        set.items.push_back(std::move(h));
    }
    return set;
}

Normalizer::Normalizer(Schema schema, std::vector<double> mean, std::vector<double> stddev)
    : schema_(std::move(schema)),
      shared_schema_(std::make_shared<const Schema>(schema_)),
      mean_(std::move(mean)),
      stddev_(std::move(stddev)) {
    if (mean_.size() != schema_.size() || stddev_.size() != schema_.size()) {
        throw InvalidArgument("normalizer dimensions do not match its schema");
    }
    for (double s : stddev_) {
        if (!(s > 0) || !std::isfinite(s)) {
            throw InvalidArgument("normalizer standard deviations must be positive");
        }
    }
}

Normalizer Normalizer::identity(Schema schema) {
    const std::size_t d = schema.size();
    return Normalizer(std::move(schema), std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
}

Normalizer Normalizer::fit(std::span<const MetricVector* const> vectors) {
    if (vectors.empty()) {
        throw InvalidArgument("cannot fit a normalizer on an empty set");
    }
    const MetricVector& first = *vectors.front();
    const std::size_t d = first.size();
    std::vector<double> mean(d, 0.0);
    for (const MetricVector* mv : vectors) {
        if (!same_schema(*mv, first)) {
            throw InvalidArgument("mixed schemas in normalizer training data");
        }
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += mv->values()[j];
        }
    }
    const double n = static_cast<double>(vectors.size());
    for (double& m : mean) {
        m /= n;
    }
    std::vector<double> stddev(d, 0.0);
    for (const MetricVector* mv : vectors) {
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = mv->values()[j] - mean[j];
            stddev[j] += dev * dev;
        }
    }
    for (double& s : stddev) {
        s = std::sqrt(s / n);
        if (s < 1e-12) {
            s = 1.0;
        }
    }
    return Normalizer(first.schema(), std::move(mean), std::move(stddev));
}

void Normalizer::apply_in_place(std::span<double> values) const {
    if (values.size() != mean_.size()) {
        throw InvalidArgument("normalizer expects " + std::to_string(mean_.size()) + " values, got " +
                              std::to_string(values.size()));
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
        values[j] = (values[j] - mean_[j]) / stddev_[j];
    }
}

MetricVector Normalizer::apply(const MetricVector& mv) const {
    if (mv.schema() != schema_) {
        throw InvalidArgument("schema mismatch between normalizer and metric vector");
    }
    std::vector<double> values = mv.values();
    apply_in_place(values);
    return MetricVector(shared_schema_, std::move(values), mv.loc());
}

Normalizer fit_normalizer(const HvsmSet& train) {
    std::vector<const MetricVector*> all;
    for (const auto& h : train.items) {
        for (const auto& mv : h.sequence) {
            all.push_back(&mv);
        }
    }
    return Normalizer::fit(all);
}

HvsmSet apply_normalizer(const Normalizer& n, const HvsmSet& s) {
    HvsmSet out;
    out.anchor_version = s.anchor_version;
    out.len = s.len;
    out.items.reserve(s.items.size());
    for (const auto& h : s.items) {
        Hvsm copy;
        copy.key = h.key;
        copy.version_ids = h.version_ids;
        copy.label = h.label;
        copy.bugs = h.bugs;
        copy.sequence.reserve(h.sequence.size());
        for (const auto& mv : h.sequence) {
            copy.sequence.push_back(n.apply(mv));
        }
        out.items.push_back(std::move(copy));
    }
    return out;
}

void write_hvsm_csv(std::ostream& out, const HvsmSet& set) {
    csv::Row header{"name", "version", "T", "step"};
    if (!set.items.empty()) {
        const auto& schema = set.items.front().last().schema();
        header.insert(header.end(), schema.begin(), schema.end());
    }
    header.push_back("label");
    out << csv::join(header) << '\n';
    for (const auto& h : set.items) {
        for (std::size_t t = 0; t < h.length(); ++t) {
            csv::Row row{h.key.str(), h.version_ids[t], std::to_string(h.length()), std::to_string(t + 1)};
            for (double v : h.sequence[t].values()) {
                row.push_back(csv::format_double(v));
            }
            row.push_back(h.label ? std::to_string(*h.label) : std::string());
            out << csv::join(row) << '\n';
        }
    }
}

} // namespace hvsm
