// Writes the inputs used by the command-line tests into the given directory.

#include "support/fixtures.hpp"

#include "hvsm/random.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_cli_fixture <dir>\n";
        return 2;
    }
    const fs::path dir = argv[1];
    fs::remove_all(dir);
    fs::create_directories(dir);

    const auto history = hvsm::testing::trend_project(100, 17, 4, "synthetic");
    std::ofstream yaml(dir / "experiment.yaml");
    yaml << "repeats: 2\nseed: 3\nthreads: 2\nrnn: {hidden_size: 6, iterations: 60}\n"
            "metrics: [loc, trend, noise_a, noise_b, noise_c]\n"
            "projects:\n  - name: synthetic\n    versions:\n";
    for (const auto& v : history.versions()) {
        const std::string file = "synthetic-" + v.version_id + ".csv";
        std::ofstream out(dir / file);
        hvsm::write_metrics_csv(out, v);
        yaml << "      - {id: \"" << v.version_id << "\", metrics: " << file << "}\n";
    }

    std::ofstream(dir / "scores.csv") << "name,score,loc,bugs\nf1,0.9,10,1\nf2,0.8,10,0\nf3,0.1,80,1\n";
    std::ofstream(dir / "bad_scores.csv") << "name,score,loc,bugs\nf1,high,10,1\n";

    hvsm::Rng rng(5);
    std::ofstream values(dir / "values.csv");
    values << "technique,dataset,run,value\n";
    for (const char* technique : {"a", "b", "c"}) {
        const double base = technique[0] == 'a' ? 0.9 : 0.3;
        for (int d = 0; d < 6; ++d) {
            for (int r = 0; r < 10; ++r) {
                values << technique << ",d" << d << "," << r << "," << base + 0.02 * rng.normal() << "\n";
            }
        }
    }
    return 0;
}
