#include "hvsm/report.hpp"

#include "hvsm/csv.hpp"
#include "hvsm/error.hpp"

#include <fstream>

namespace hvsm::experiment {

using nlohmann::ordered_json;

namespace {

ordered_json summary_json(const HvsmSummary& s) {
    return {{"anchor", s.anchor},
            {"version_sequence", s.version_sequence},
            {"mean_length", s.mean_length},
            {"files", s.files},
            {"developing", s.developing},
            {"developing_percent", s.developing_percent}};
}

HvsmSummary summary_from(const ordered_json& j) {
    HvsmSummary s;
    s.anchor = j.at("anchor").get<std::string>();
    s.version_sequence = j.at("version_sequence").get<std::vector<std::string>>();
    s.mean_length = j.at("mean_length").get<double>();
    s.files = j.at("files").get<std::size_t>();
    s.developing = j.at("developing").get<std::size_t>();
    s.developing_percent = j.at("developing_percent").get<double>();
    return s;
}

ordered_json run_json(const eval::CeReport& r) {
    ordered_json j;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        j[std::string(kMetricNames[m])] = metric_value(r, m);
    }
    j["loc_adjusted"] = r.loc_adjusted;
    return j;
}

eval::CeReport run_from(const ordered_json& j) {
    eval::CeReport r;
    for (std::size_t i = 0; i < 4; ++i) {
        r.ce[i] = j.at(std::string(kMetricNames[i])).get<double>();
    }
    r.acc = j.at("acc").get<double>();
    r.auc = j.at("auc").get<double>();
    r.loc_adjusted = j.at("loc_adjusted").get<std::size_t>();
    return r;
}

ordered_json curve_json(const eval::CeCurve& c) {
    ordered_json points = ordered_json::array();
    for (const auto& p : c.points) {
        points.push_back({p.loc_fraction, p.bug_fraction});
    }
    ordered_json order = ordered_json::array();
    for (const auto& k : c.ordering) {
        order.push_back(k.str());
    }
    return {{"points", points}, {"ordering", order}};
}

eval::CeCurve curve_from(const ordered_json& j) {
    eval::CeCurve c;
    for (const auto& p : j.at("points")) {
        c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    for (const auto& k : j.at("ordering")) {
        c.ordering.emplace_back(k.get<std::string>());
    }
    return c;
}

stats::Outcome outcome_from(const std::string& s) {
    for (auto o : {stats::Outcome::Win, stats::Outcome::Tie, stats::Outcome::Loss}) {
        if (stats::to_string(o) == s) {
            return o;
        }
    }
    throw ParseError("unknown win/tie/loss outcome '" + s + "'");
}

} // namespace

ordered_json to_json(const ExperimentReport& report) {
    ordered_json j;
    j["format"] = "hvsm-report";
    j["version"] = 1;
    j["techniques"] = report.techniques;
    j["reference"] = report.reference;
    j["repeats"] = report.repeats;
    j["metrics"] = ordered_json::array();
    for (auto m : kMetricNames) {
        j["metrics"].push_back(std::string(m));
    }

    ordered_json projects = ordered_json::array();
    for (const auto& p : report.projects) {
        ordered_json pj;
        pj["project"] = p.project;
        pj["train_version"] = p.train_version;
        pj["test_version"] = p.test_version;
        pj["error"] = p.error ? ordered_json(*p.error) : ordered_json(nullptr);
        pj["train"] = summary_json(p.train);
        pj["test"] = summary_json(p.test);
        ordered_json techniques = ordered_json::array();
        for (const auto& t : p.techniques) {
            ordered_json runs = ordered_json::array();
            for (const auto& r : t.runs) {
                runs.push_back(run_json(r));
            }
            techniques.push_back({{"technique", t.technique}, {"runs", runs}, {"curve", curve_json(t.curve)}});
        }
        pj["techniques"] = techniques;
        projects.push_back(std::move(pj));
    }
    j["projects"] = projects;

    ordered_json aggregates;
    for (const auto& [metric, agg] : report.aggregates) {
        ordered_json aj;
        aj["mean"] = agg.mean;
        aj["average_rank"] = agg.average_rank;
        aj["scott_knott"] = agg.sk.ranks;
        ordered_json wtl;
        for (const auto& [baseline, counts] : agg.wtl) {
            ordered_json detail;
            if (auto it = agg.wtl_detail.find(baseline); it != agg.wtl_detail.end()) {
                for (const auto& [project, r] : it->second) {
                    detail[project] = {{"outcome", std::string(stats::to_string(r.outcome))},
                                       {"p_value", r.p_value},
                                       {"delta", r.delta}};
                }
            }
            wtl[baseline] = {{"win", counts.win},
                             {"tie", counts.tie},
                             {"loss", counts.loss},
                             {"projects", detail.is_null() ? ordered_json::object() : detail}};
        }
        aj["win_tie_loss"] = wtl.is_null() ? ordered_json::object() : wtl;
        aggregates[metric] = aj;
    }
    j["aggregates"] = aggregates.is_null() ? ordered_json::object() : aggregates;
    return j;
}

ExperimentReport report_from_json(const ordered_json& j) {
    try {
        if (j.at("format").get<std::string>() != "hvsm-report" || j.at("version").get<int>() != 1) {
            throw ParseError("not an hvsm report (version 1)");
        }
        ExperimentReport r;
        r.techniques = j.at("techniques").get<std::vector<std::string>>();
        r.reference = j.at("reference").get<std::string>();
        r.repeats = j.at("repeats").get<std::size_t>();
        for (const auto& pj : j.at("projects")) {
            ProjectResult p;
            p.project = pj.at("project").get<std::string>();
            p.train_version = pj.at("train_version").get<std::string>();
            p.test_version = pj.at("test_version").get<std::string>();
            if (!pj.at("error").is_null()) {
                p.error = pj.at("error").get<std::string>();
            }
            p.train = summary_from(pj.at("train"));
            p.test = summary_from(pj.at("test"));
            for (const auto& tj : pj.at("techniques")) {
                TechniqueRuns t;
                t.technique = tj.at("technique").get<std::string>();
                for (const auto& rj : tj.at("runs")) {
                    t.runs.push_back(run_from(rj));
                }
                t.curve = curve_from(tj.at("curve"));
                p.techniques.push_back(std::move(t));
            }
            r.projects.push_back(std::move(p));
        }
        for (const auto& [metric, aj] : j.at("aggregates").items()) {
            MetricAggregate agg;
            agg.mean = aj.at("mean").get<std::map<std::string, double>>();
            agg.average_rank = aj.at("average_rank").get<std::map<std::string, double>>();
            agg.sk.ranks = aj.at("scott_knott").get<std::vector<std::vector<std::string>>>();
            agg.sk.means = agg.mean;
            for (const auto& [baseline, wj] : aj.at("win_tie_loss").items()) {
                stats::WtlCounts c;
                c.win = wj.at("win").get<std::size_t>();
                c.tie = wj.at("tie").get<std::size_t>();
                c.loss = wj.at("loss").get<std::size_t>();
                agg.wtl[baseline] = c;
                for (const auto& [project, dj] : wj.at("projects").items()) {
                    stats::WtlResult res;
                    res.outcome = outcome_from(dj.at("outcome").get<std::string>());
                    res.p_value = dj.at("p_value").get<double>();
                    res.delta = dj.at("delta").get<double>();
                    agg.wtl_detail[baseline][project] = res;
                }
            }
            r.aggregates[metric] = std::move(agg);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

std::string safe_name(std::string s) {
    for (char& ch : s) {
        if (ch == '/' || ch == '\\' || ch == ' ' || ch == ':') {
            ch = '_';
        }
    }
    return s;
}

} // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "ce_curves", ec);
    if (ec) {
        throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    }

    {
        const auto path = dir / "report.json";
        auto out = open_out(path);
        out << to_json(report).dump(2) << '\n';
        check_written(out, path);
    }
    {
        const auto path = dir / "summary.csv";
        auto out = open_out(path);
        csv::Row header{"project", "technique"};
        for (auto m : kMetricNames) {
            header.emplace_back(m);
        }
        out << csv::join(header) << '\n';
        for (const auto& p : report.projects) {
            for (const auto& t : p.techniques) {
                csv::Row row{p.project, t.technique};
                for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
                    row.push_back(csv::format_fixed(run_mean(t, m), 3));
                }
                out << csv::join(row) << '\n';
            }
        }
        check_written(out, path);
    }
    for (const auto& p : report.projects) {
        for (const auto& t : p.techniques) {
            const auto path = dir / "ce_curves" / (safe_name(p.project) + "_" + safe_name(t.technique) + ".csv");
            auto out = open_out(path);
            eval::write_curve_csv(out, t.curve);
            check_written(out, path);
        }
    }
    {
        const auto path = dir / "sk_groups.txt";
        auto out = open_out(path);
        for (auto m : kMetricNames) {
            const auto it = report.aggregates.find(std::string(m));
            out << '[' << m << "]\n";
            if (it == report.aggregates.end()) {
                continue;
            }
            for (std::size_t r = 0; r < it->second.sk.ranks.size(); ++r) {
                out << "rank " << r + 1 << ':';
                for (const auto& t : it->second.sk.ranks[r]) {
                    out << ' ' << t;
                }
                out << '\n';
            }
        }
        check_written(out, path);
    }
    {
        const auto path = dir / "win_tie_loss.csv";
        auto out = open_out(path);
        out << "metric,reference,baseline,win,tie,loss\n";
        for (auto m : kMetricNames) {
            const auto it = report.aggregates.find(std::string(m));
            if (it == report.aggregates.end()) {
                continue;
            }
            for (const auto& [baseline, c] : it->second.wtl) {
                out << csv::join({std::string(m), report.reference, baseline, std::to_string(c.win),
                                  std::to_string(c.tie), std::to_string(c.loss)})
                    << '\n';
            }
        }
        check_written(out, path);
    }
}

} // namespace hvsm::experiment
