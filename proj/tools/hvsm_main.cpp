// hvsm: run experiments and the evaluation/statistics primitives from the shell.

#include "hvsm/csv.hpp"
#include "hvsm/effort_eval.hpp"
#include "hvsm/error.hpp"
#include "hvsm/experiment.hpp"
#include "hvsm/rnn.hpp"
#include "hvsm/stats.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace {

using hvsm::csv::format_fixed;

/// Header-driven table reader: maps each required column to its index.
class Table {
public:
    Table(const std::string& path, std::vector<std::string> columns) : in_(path), reader_(in_) {
        if (!in_) {
            throw hvsm::Error("cannot open " + path);
        }
        const auto header = reader_.next();
        if (!header) {
            throw hvsm::ParseError(path + ": empty file", 1);
        }
        for (const auto& c : columns) {
            std::optional<std::size_t> at;
            for (std::size_t i = 0; i < header->size(); ++i) {
                if (hvsm::csv::trim((*header)[i]) == c) {
                    at = i;
                }
            }
            if (!at) {
                throw hvsm::ParseError(path + ": missing column '" + c + "'", 1);
            }
            index_.push_back(*at);
        }
        path_ = path;
    }

    /// Next row as the requested columns, in request order.
    std::optional<std::vector<std::string>> next() {
        auto row = reader_.next();
        if (!row) {
            return std::nullopt;
        }
        std::vector<std::string> out;
        for (std::size_t c = 0; c < index_.size(); ++c) {
            if (index_[c] >= row->size()) {
                throw hvsm::ParseError(path_ + ": short row", reader_.line(), index_[c] + 1);
            }
            out.push_back(hvsm::csv::trim((*row)[index_[c]]));
        }
        return out;
    }

    double number(const std::string& text, std::size_t column) const {
        if (auto v = hvsm::csv::parse_double(text)) {
            return *v;
        }
        throw hvsm::ParseError(path_ + ": not a number: '" + text + "'", reader_.line(), index_[column] + 1);
    }

    std::uint64_t count(const std::string& text, std::size_t column) const {
        const auto v = hvsm::csv::parse_int(text);
        if (!v || *v < 0) {
            throw hvsm::ParseError(path_ + ": not a non-negative integer: '" + text + "'", reader_.line(),
                                   index_[column] + 1);
        }
        return static_cast<std::uint64_t>(*v);
    }

private:
    std::ifstream in_;
    hvsm::csv::Reader reader_;
    std::vector<std::size_t> index_;
    std::string path_;
};

int cmd_run(const std::string& config_path, const std::string& output, std::optional<std::size_t> threads) {
    auto cfg = hvsm::experiment::load_config(config_path);
    if (!output.empty()) {
        cfg.output_dir = output;
    }
    if (threads) {
        cfg.threads = *threads;
    }
    const auto report = hvsm::experiment::run_experiment(cfg);
    hvsm::experiment::emit_report(report, cfg.output_dir);

    std::cout << "project,technique";
    for (auto m : hvsm::experiment::kMetricNames) {
        std::cout << ',' << m;
    }
    std::cout << '\n';
    int failed = 0;
    for (const auto& p : report.projects) {
        if (p.error) {
            std::cerr << "hvsm: project " << p.project << ": " << *p.error << '\n';
            ++failed;
            continue;
        }
        for (const auto& t : p.techniques) {
            std::cout << hvsm::csv::escape(p.project) << ',' << t.technique;
            for (std::size_t m = 0; m < hvsm::experiment::kMetricNames.size(); ++m) {
                std::cout << ',' << format_fixed(hvsm::experiment::run_mean(t, m), 3);
            }
            std::cout << '\n';
        }
    }
    std::cout << "report written to " << cfg.output_dir.string() << '\n';
    return failed == static_cast<int>(report.projects.size()) && failed > 0 ? 1 : 0;
}

int cmd_gradcheck(std::size_t hidden, std::size_t input, std::size_t steps, std::uint64_t seed, double tolerance) {
    hvsm::rnn::Hyperparams h;
    h.hidden_size = hidden;
    h.seed = seed;
    double worst = 0.0;
    for (int y : {0, 1}) {
        const double err = hvsm::rnn::gradient_check(h, input, steps, y);
        std::cout << "y=" << y << " max relative error " << hvsm::csv::format_double(err) << '\n';
        worst = std::max(worst, err);
    }
    if (worst >= tolerance) {
        std::cerr << "hvsm: gradient check above tolerance " << tolerance << '\n';
        return 1;
    }
    return 0;
}

int cmd_eval(const std::string& path) {
    Table table(path, {"name", "score", "loc", "bugs"});
    std::vector<hvsm::eval::ScoredFile> files;
    std::size_t adjusted = 0;
    while (auto row = table.next()) {
        bool adj = false;
        files.push_back(hvsm::eval::make_scored_file(hvsm::FileKey((*row)[0]), table.number((*row)[1], 1),
                                                     table.count((*row)[2], 2), table.count((*row)[3], 3), &adj));
        adjusted += adj;
    }
    if (files.empty()) {
        throw hvsm::InvalidArgument(path + ": no files");
    }
    const auto r = hvsm::eval::evaluate(files, adjusted);
    std::cout << "metric,value\n";
    for (std::size_t m = 0; m < hvsm::experiment::kMetricNames.size(); ++m) {
        std::cout << hvsm::experiment::kMetricNames[m] << ',' << format_fixed(hvsm::experiment::metric_value(r, m), 4)
                  << '\n';
    }
    if (adjusted) {
        std::cerr << "hvsm: " << adjusted << " file(s) with loc 0 counted as loc 1\n";
    }
    return 0;
}

int cmd_stats(const std::string& path, std::string reference, bool pool_runs) {
    Table table(path, {"technique", "dataset", "run", "value"});
    // technique -> dataset -> run -> value
    std::map<std::string, std::map<std::string, std::map<long long, double>>> values;
    while (auto row = table.next()) {
        const auto run = static_cast<long long>(table.count((*row)[2], 2));
        auto& slot = values[(*row)[0]][(*row)[1]];
        if (!slot.emplace(run, table.number((*row)[3], 3)).second) {
            throw hvsm::ParseError(path + ": duplicate (technique, dataset, run)");
        }
    }
    if (values.empty()) {
        throw hvsm::InvalidArgument(path + ": no rows");
    }
    if (reference.empty()) {
        reference = values.begin()->first;
    }
    if (!values.contains(reference)) {
        throw hvsm::InvalidArgument("reference technique '" + reference + "' not in " + path);
    }
    const auto& datasets = values.at(reference);
    for (const auto& [technique, by_dataset] : values) {
        if (by_dataset.size() != datasets.size()) {
            throw hvsm::InvalidArgument("technique '" + technique + "' does not cover every dataset");
        }
    }

    auto runs_of = [&](const std::string& technique, const std::string& dataset) {
        const auto& d = values.at(technique);
        const auto it = d.find(dataset);
        if (it == d.end()) {
            throw hvsm::InvalidArgument("technique '" + technique + "' has no values for '" + dataset + "'");
        }
        std::vector<double> out;
        for (const auto& [run, v] : it->second) {
            out.push_back(v);
        }
        return out;
    };

    std::map<std::string, std::vector<double>> sk_input;
    std::map<std::string, std::map<std::string, double>> rank_table;
    for (const auto& [technique, by_dataset] : values) {
        for (const auto& [dataset, runs] : datasets) {
            const auto r = runs_of(technique, dataset);
            double mean = 0.0;
            for (double v : r) {
                mean += v / static_cast<double>(r.size());
            }
            rank_table[dataset][technique] = mean;
            if (pool_runs) {
                sk_input[technique].insert(sk_input[technique].end(), r.begin(), r.end());
            } else {
                sk_input[technique].push_back(mean);
            }
        }
    }

    const auto sk = hvsm::stats::scott_knott(sk_input);
    std::cout << "[scott-knott]\n";
    for (std::size_t r = 0; r < sk.ranks.size(); ++r) {
        std::cout << "rank " << r + 1 << ':';
        for (const auto& t : sk.ranks[r]) {
            std::cout << ' ' << t;
        }
        std::cout << '\n';
    }
    std::cout << "[average-rank]\n";
    for (const auto& [technique, ar] : hvsm::experiment::average_rank(rank_table)) {
        std::cout << technique << ',' << format_fixed(ar, 3) << '\n';
    }
    std::cout << "[win-tie-loss reference=" << reference << "]\nbaseline,win,tie,loss\n";
    for (const auto& [technique, by_dataset] : values) {
        if (technique == reference) {
            continue;
        }
        hvsm::stats::WtlCounts counts;
        for (const auto& [dataset, runs] : datasets) {
            counts.add(hvsm::stats::win_tie_loss(runs_of(reference, dataset), runs_of(technique, dataset)).outcome);
        }
        std::cout << technique << ',' << counts.win << ',' << counts.tie << ',' << counts.loss << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Defect prediction from historical version sequences of metrics"};
    app.require_subcommand(1);

    std::string config, output;
    std::optional<std::size_t> threads;
    auto* run = app.add_subcommand("run", "Run an experiment described by a YAML file");
    run->add_option("config", config, "Experiment file")->required();
    run->add_option("-o,--output", output, "Output directory (overrides output_dir)");
    run->add_option("-j,--threads", threads, "Worker threads (0 = hardware concurrency)");

    std::size_t hidden = 3, input = 4, steps = 3;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
    auto* grad = app.add_subcommand("gradcheck", "Compare BPTT gradients with finite differences");
    grad->add_option("--hidden", hidden, "Hidden units")->check(CLI::PositiveNumber);
    grad->add_option("--input", input, "Input dimension")->check(CLI::PositiveNumber);
    grad->add_option("--steps", steps, "Sequence length")->check(CLI::PositiveNumber);
    grad->add_option("--seed", seed, "Random seed");
    grad->add_option("--tolerance", tolerance, "Largest accepted relative error");

    std::string scores;
    auto* eval = app.add_subcommand("eval", "Effort-aware metrics for a scored file list");
    eval->add_option("scores", scores, "CSV with columns name, score, loc, bugs")->required();

    std::string values, reference;
    bool pool_runs = false;
    auto* st = app.add_subcommand("stats", "Scott-Knott ranks and Win/Tie/Loss counts");
    st->add_option("values", values, "CSV with columns technique, dataset, run, value")->required();
    st->add_option("-r,--reference", reference, "Technique compared against the others");
    st->add_flag("--pool-runs", pool_runs, "Rank on every run instead of per-dataset means");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(config, output, threads);
        }
        if (*grad) {
            return cmd_gradcheck(hidden, input, steps, seed, tolerance);
        }
        if (*eval) {
            return cmd_eval(scores);
        }
        return cmd_stats(values, reference, pool_runs);
    } catch (const hvsm::ParseError& e) {
        std::cerr << "hvsm: " << e.what();
        if (e.row()) {
            std::cerr << " (row " << e.row();
            if (e.column()) {
                std::cerr << ", column " << e.column();
            }
            std::cerr << ')';
        }
        std::cerr << '\n';
    } catch (const std::exception& e) {
        std::cerr << "hvsm: " << e.what() << '\n';
    }
    return 1;
}
