#include "hvsm/experiment.hpp"

#include "hvsm/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

namespace hvsm::experiment {

namespace {

bool is_random_technique(std::string_view t) { return t == "rnn" || t == "nn"; }

void check_keys(const YAML::Node& node, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) {
        throw ParseError("config section '" + std::string(where) + "' must be a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown config key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
void read(const YAML::Node& node, std::string_view key, T& out) {
    if (const auto v = node[std::string(key)]) {
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ParseError("config key '" + std::string(key) + "' has an invalid value");
        }
    }
}

void read_rnn(const YAML::Node& node, std::string_view where, rnn::Hyperparams& h) {
    if (!node) {
        return;
    }
    check_keys(node, where, {"hidden_size", "eta", "lambda", "iterations", "init_scale", "step_halving"});
    read(node, "hidden_size", h.hidden_size);
    read(node, "eta", h.eta);
    read(node, "lambda", h.lambda);
    read(node, "iterations", h.iterations);
    read(node, "init_scale", h.init_scale);
    read(node, "step_halving", h.step_halving);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

void ExperimentConfig::validate() const {
    if (repeats == 0) {
        throw InvalidArgument("repeats must be at least 1");
    }
    if (len && *len == 0) {
        throw InvalidArgument("len must be at least 1");
    }
    if (techniques.empty()) {
        throw InvalidArgument("no techniques selected");
    }
    std::set<std::string> seen;
    for (const auto& t : techniques) {
        if (t != "rnn") {
            baselines::kind_from_string(t);
        }
        if (!seen.insert(t).second) {
            throw InvalidArgument("technique '" + t + "' listed twice");
        }
    }
    rnn.validate();
    baselines.nn.validate();
    std::set<std::string> names;
    for (const auto& p : projects) {
        if (!names.insert(p.manifest.name).second) {
            throw InvalidArgument("project '" + p.manifest.name + "' listed twice");
        }
        std::optional<std::size_t> train, test;
        for (std::size_t i = 0; i < p.manifest.versions.size(); ++i) {
            if (p.manifest.versions[i].version_id == p.train_version) {
                train = i;
            }
            if (p.manifest.versions[i].version_id == p.test_version) {
                test = i;
            }
        }
        if (!train || !test) {
            throw InvalidArgument("project '" + p.manifest.name + "': train/test version not in manifest");
        }
        if (*train >= *test) {
            throw InvalidArgument("project '" + p.manifest.name + "': train version must precede test version");
        }
    }
}

ExperimentConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("invalid YAML: ") + e.what(), static_cast<std::size_t>(e.mark.line + 1));
    }
    check_keys(root, "top level",
               {"output_dir", "seed", "repeats", "threads", "len", "metric_set", "techniques", "sk_pool_runs",
                "metrics", "csv", "rnn", "lr", "knn", "nn", "projects"});

    ExperimentConfig cfg;
    cfg.baselines.nn = cfg.rnn;
    if (auto v = root["output_dir"]) {
        cfg.output_dir = resolve(base_dir, v.as<std::string>());
    }
    read(root, "seed", cfg.seed);
    read(root, "repeats", cfg.repeats);
    read(root, "threads", cfg.threads);
    read(root, "sk_pool_runs", cfg.sk_pool_runs);
    if (auto v = root["len"]) {
        const auto text = v.as<std::string>();
        if (text != "all") {
            std::size_t len = 0;
            read(root, "len", len);
            cfg.len = len;
        }
    }
    if (auto v = root["metric_set"]) {
        const auto text = v.as<std::string>();
        if (text == "code") {
            cfg.metric_set = MetricSet::Code;
        } else if (text == "code+process") {
            cfg.metric_set = MetricSet::CodeAndProcess;
        } else {
            throw ParseError("metric_set must be 'code' or 'code+process'");
        }
    }
    read(root, "techniques", cfg.techniques);
    read(root, "metrics", cfg.code_metrics);
    if (auto v = root["csv"]) {
        check_keys(v, "csv", {"key_column", "bug_column"});
        read(v, "key_column", cfg.csv.key_column);
        read(v, "bug_column", cfg.csv.bug_column);
    }
    read_rnn(root["rnn"], "rnn", cfg.rnn);
    cfg.baselines.nn = cfg.rnn;
    read_rnn(root["nn"], "nn", cfg.baselines.nn);
    if (auto v = root["lr"]) {
        check_keys(v, "lr", {"eta", "lambda", "iterations"});
        read(v, "eta", cfg.baselines.lr.eta);
        read(v, "lambda", cfg.baselines.lr.lambda);
        read(v, "iterations", cfg.baselines.lr.iterations);
    }
    if (auto v = root["knn"]) {
        check_keys(v, "knn", {"k"});
        read(v, "k", cfg.baselines.k);
    }
    if (auto projects = root["projects"]) {
        if (!projects.IsSequence()) {
            throw ParseError("'projects' must be a list");
        }
        for (const auto& p : projects) {
            check_keys(p, "project", {"name", "train", "test", "versions"});
            ProjectConfig pc;
            read(p, "name", pc.manifest.name);
            read(p, "train", pc.train_version);
            read(p, "test", pc.test_version);
            if (pc.manifest.name.empty()) {
                throw ParseError("project without a name");
            }
            const auto versions = p["versions"];
            if (!versions || !versions.IsSequence()) {
                throw ParseError("project '" + pc.manifest.name + "' needs a 'versions' list");
            }
            for (const auto& v : versions) {
                check_keys(v, "version", {"id", "metrics", "process"});
                VersionSource src;
                read(v, "id", src.version_id);
                std::string metrics;
                read(v, "metrics", metrics);
                if (src.version_id.empty() || metrics.empty()) {
                    throw ParseError("every version needs 'id' and 'metrics'");
                }
                src.metrics_csv = resolve(base_dir, metrics);
                if (auto proc = v["process"]) {
                    src.process_csv = resolve(base_dir, proc.as<std::string>());
                }
                pc.manifest.versions.push_back(std::move(src));
            }
            if (pc.train_version.empty() && pc.test_version.empty() && pc.manifest.versions.size() >= 2) {
                // Default protocol: the last two versions.
                const auto n = pc.manifest.versions.size();
                pc.train_version = pc.manifest.versions[n - 2].version_id;
                pc.test_version = pc.manifest.versions[n - 1].version_id;
            }
            cfg.projects.push_back(std::move(pc));
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

double metric_value(const eval::CeReport& r, std::size_t metric) {
    if (metric < 4) {
        return r.ce[metric];
    }
    return metric == 4 ? r.acc : r.auc;
}

double run_mean(const TechniqueRuns& t, std::size_t metric) {
    double s = 0.0;
    for (const auto& r : t.runs) {
        s += metric_value(r, metric);
    }
    return t.runs.empty() ? 0.0 : s / static_cast<double>(t.runs.size());
}

const TechniqueRuns* ProjectResult::find(std::string_view technique) const {
    for (const auto& t : techniques) {
        if (t.technique == technique) {
            return &t;
        }
    }
    return nullptr;
}

std::map<std::string, double> average_rank(const std::map<std::string, std::map<std::string, double>>& table) {
    std::map<std::string, double> sum;
    if (table.empty()) {
        return sum;
    }
    for (const auto& [project, row] : table) {
        std::vector<std::pair<double, std::string>> sorted;
        for (const auto& [technique, value] : row) {
            sorted.emplace_back(value, technique);
        }
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j].first == sorted[i].first) {
                ++j;
            }
            const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
            for (std::size_t k = i; k < j; ++k) {
                sum[sorted[k].second] += rank;
            }
            i = j;
        }
    }
    for (auto& [technique, s] : sum) {
        s /= static_cast<double>(table.size());
    }
    return sum;
}

namespace {

HvsmSummary summarize(const ProjectHistory& history, const HvsmSet& set) {
    HvsmSummary s;
    s.anchor = set.anchor_version;
    const std::size_t vi = history.index_of(set.anchor_version);
    const std::size_t start = vi + 1 >= set.len ? vi + 1 - set.len : 0;
    for (std::size_t i = start; i <= vi; ++i) {
        s.version_sequence.push_back(history.versions()[i].version_id);
    }
    s.mean_length = set.mean_length();
    s.files = set.m();
    const auto counts = lifecycle_counts(history, set.anchor_version);
    s.developing = counts.developing;
    s.developing_percent = 100.0 * counts.developing_fraction();
    return s;
}

// Read-only inputs shared by every job of one project.
struct ProjectData {
    HvsmSet test;
    Normalizer rnn_normalizer;
    std::vector<rnn::Sample> rnn_train;
    std::vector<baselines::LabeledVector> baseline_train;
};

struct Job {
    std::size_t project;
    std::size_t technique;
    std::size_t repeat;
};

std::vector<double> run_job(const ExperimentConfig& cfg, const ProjectData& data, const std::string& technique,
                            std::size_t repeat) {
    std::vector<double> scores;
    scores.reserve(data.test.m());
    if (technique == "rnn") {
        rnn::Hyperparams h = cfg.rnn;
        h.seed = cfg.seed + repeat;
        const auto params = rnn::train(data.rnn_train, h).params;
        for (const auto& item : data.test.items) {
            scores.push_back(rnn::predict(params, item, data.rnn_normalizer));
        }
        return scores;
    }
    baselines::Options options = cfg.baselines;
    options.nn.seed = cfg.seed + repeat;
    const auto model = baselines::train_baseline(baselines::kind_from_string(technique), data.baseline_train, options);
    for (const auto& item : data.test.items) {
        scores.push_back(baselines::predict_baseline(model, item.last()));
    }
    return scores;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) {
        threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                fn(i);
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
}

} // namespace

ExperimentReport run_on_histories(const ExperimentConfig& cfg, const std::vector<ProjectHistory>& histories) {
    cfg.validate();
    if (histories.size() != cfg.projects.size()) {
        throw InvalidArgument("histories do not match the configured projects");
    }
    ExperimentReport report;
    report.techniques = cfg.techniques;
    report.repeats = cfg.repeats;
    report.reference = std::find(cfg.techniques.begin(), cfg.techniques.end(), "rnn") != cfg.techniques.end()
                           ? "rnn"
                           : cfg.techniques.front();

    std::vector<std::optional<ProjectData>> data(histories.size());
    report.projects.resize(histories.size());
    for (std::size_t p = 0; p < histories.size(); ++p) {
        const auto& pc = cfg.projects[p];
        const auto& history = histories[p];
        ProjectResult& result = report.projects[p];
        result.project = pc.manifest.name;
        result.train_version = pc.train_version;
        result.test_version = pc.test_version;
        try {
            const std::size_t train_i = history.index_of(pc.train_version);
            const std::size_t test_i = history.index_of(pc.test_version);
            if (train_i >= test_i) {
                throw InvalidArgument("train version must precede test version");
            }
            const HvsmSet train = extract_hvsm_set(history, pc.train_version, cfg.len.value_or(train_i + 1));
            HvsmSet test = extract_hvsm_set(history, pc.test_version, cfg.len.value_or(test_i + 1));
            result.train = summarize(history, train);
            result.test = summarize(history, test);
            if (train.items.empty()) {
                throw InvalidArgument("empty training set");
            }
            if (test.items.empty()) {
                throw InvalidArgument("empty test set");
            }
            if (std::none_of(test.items.begin(), test.items.end(), [](const Hvsm& h) { return h.bugs > 0; })) {
                throw UndefinedMetric("test version has no defective files; CE is undefined");
            }
            ProjectData pd;
            pd.rnn_normalizer = fit_normalizer(train);
            pd.rnn_train = rnn::to_samples(apply_normalizer(pd.rnn_normalizer, train));
            for (const auto& item : train.items) {
                pd.baseline_train.push_back({item.last(), item.label.value_or(0)});
            }
            pd.test = std::move(test);
            data[p] = std::move(pd);
        } catch (const Error& e) {
            result.error = e.what();
        }
    }

    std::vector<Job> jobs;
    for (std::size_t p = 0; p < histories.size(); ++p) {
        if (!data[p]) {
            continue;
        }
        for (std::size_t t = 0; t < cfg.techniques.size(); ++t) {
            const std::size_t n = is_random_technique(cfg.techniques[t]) ? cfg.repeats : 1;
            for (std::size_t r = 0; r < n; ++r) {
                jobs.push_back({p, t, r});
            }
        }
    }
    std::vector<std::vector<double>> scores(jobs.size());
    std::vector<std::optional<std::string>> failures(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        try {
            scores[i] = run_job(cfg, *data[job.project], cfg.techniques[job.technique], job.repeat);
        } catch (const std::exception& e) {
            failures[i] = cfg.techniques[job.technique] + ": " + e.what();
        }
    });

    // Single-threaded assembly in job order.
    for (std::size_t p = 0; p < histories.size(); ++p) {
        if (!data[p]) {
            continue;
        }
        ProjectResult& result = report.projects[p];
        const HvsmSet& test = data[p]->test;
        std::vector<eval::ScoredFile> base;
        std::size_t adjusted = 0;
        for (const auto& item : test.items) {
            bool adj = false;
            base.push_back(eval::make_scored_file(item.key, 0.0, item.last().loc(), item.bugs, &adj));
            adjusted += adj ? 1 : 0;
        }
        for (std::size_t t = 0; t < cfg.techniques.size(); ++t) {
            TechniqueRuns runs;
            runs.technique = cfg.techniques[t];
            for (std::size_t i = 0; i < jobs.size() && !result.error; ++i) {
                if (jobs[i].project != p || jobs[i].technique != t) {
                    continue;
                }
                if (failures[i]) {
                    result.error = *failures[i];
                    break;
                }
                std::vector<eval::ScoredFile> files = base;
                for (std::size_t f = 0; f < files.size(); ++f) {
                    files[f].score = scores[i][f];
                }
                try {
                    runs.runs.push_back(eval::evaluate(files, adjusted));
                    if (jobs[i].repeat == 0) {
                        runs.curve = eval::ce_curve(eval::rank_by_density(files));
                    }
                } catch (const Error& e) {
                    result.error = runs.technique + ": " + e.what();
                }
            }
            if (result.error) {
                break;
            }
            // Deterministic techniques: the single result stands for every repeat.
            while (runs.runs.size() < cfg.repeats) {
                runs.runs.push_back(runs.runs.front());
            }
            result.techniques.push_back(std::move(runs));
        }
        if (result.error) {
            result.techniques.clear();
        }
    }
    aggregate(report, cfg.sk_pool_runs);
    return report;
}

void aggregate(ExperimentReport& report, bool sk_pool_runs) {
    report.aggregates.clear();
    std::vector<const ProjectResult*> ok;
    for (const auto& p : report.projects) {
        if (!p.error) {
            ok.push_back(&p);
        }
    }
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        MetricAggregate agg;
        std::map<std::string, std::map<std::string, double>> table;
        std::map<std::string, std::vector<double>> sk_values;
        for (const auto* p : ok) {
            for (const auto& t : p->techniques) {
                const double mean = run_mean(t, m);
                table[p->project][t.technique] = mean;
                agg.mean[t.technique] += mean / static_cast<double>(ok.size());
                auto& v = sk_values[t.technique];
                if (sk_pool_runs) {
                    for (const auto& r : t.runs) {
                        v.push_back(metric_value(r, m));
                    }
                } else {
                    v.push_back(mean);
                }
            }
        }
        agg.average_rank = average_rank(table);
        agg.sk = stats::scott_knott(sk_values);

        for (const auto& baseline : report.techniques) {
            if (baseline == report.reference) {
                continue;
            }
            auto& counts = agg.wtl[baseline];
            for (const auto* p : ok) {
                const auto* ref = p->find(report.reference);
                const auto* other = p->find(baseline);
                if (!ref || !other) {
                    continue;
                }
                std::vector<double> a, b;
                for (const auto& r : ref->runs) {
                    a.push_back(metric_value(r, m));
                }
                for (const auto& r : other->runs) {
                    b.push_back(metric_value(r, m));
                }
                const auto verdict = stats::win_tie_loss(a, b);
                counts.add(verdict.outcome);
                agg.wtl_detail[baseline][p->project] = verdict;
            }
        }
        report.aggregates[std::string(kMetricNames[m])] = std::move(agg);
    }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<ProjectHistory> histories;
    histories.reserve(cfg.projects.size());
    std::vector<std::string> load_errors(cfg.projects.size());
    for (std::size_t p = 0; p < cfg.projects.size(); ++p) {
        try {
            histories.push_back(load_project(cfg.projects[p].manifest, cfg.code_metrics,
                                             cfg.metric_set == MetricSet::CodeAndProcess, cfg.csv));
        } catch (const Error& e) {
            // Keep the slot; the missing versions make the project fail with this message.
            histories.emplace_back(cfg.projects[p].manifest.name, std::vector<VersionSnapshot>{});
            load_errors[p] = e.what();
        }
    }
    ExperimentReport report = run_on_histories(cfg, histories);
    for (std::size_t p = 0; p < load_errors.size(); ++p) {
        if (!load_errors[p].empty()) {
            report.projects[p].error = load_errors[p];
        }
    }
    return report;
}

} // namespace hvsm::experiment
