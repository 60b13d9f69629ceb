// bigjump: experiment runner for conditional laws of heavy-tailed sums.
//
// Subcommands: ratio-scan, tv-scan, fluct, counterexample, oracle-check,
// marginals-check. Flags mirror a flat key=value config file (--config);
// command-line values override file values. BIGJUMP_SEED provides the
// default seed. Exit codes: 0 ok, 2 config error, 3 attempt budget
// exhausted, 4 acceptance check failed.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "bigjump/experiment.hpp"

using namespace bigjump;

namespace {

struct Flat {
    ExperimentConfig cfg;
    std::string n_csv;
};

// flat key=value config, keys named like the long flags
void apply_config_key(Flat& f, const std::string& key, const std::string& val, int line_no) {
    auto num = [&](const char* what) {
        try {
            return std::stod(val);
        } catch (const std::exception&) {
            throw ConfigError(std::string("config line ") + std::to_string(line_no) + ": bad number for " + what);
        }
    };
    if (key == "dist")
        f.cfg.dist = val;
    else if (key == "n")
        f.n_csv = val;
    else if (key == "x")
        f.cfg.x_spec = val;
    else if (key == "delta")
        f.cfg.delta_spec = val;
    else if (key == "samples")
        f.cfg.samples = static_cast<std::size_t>(num("samples"));
    else if (key == "proposals")
        f.cfg.proposals = static_cast<std::size_t>(num("proposals"));
    else if (key == "seed")
        f.cfg.seed = static_cast<std::uint64_t>(num("seed"));
    else if (key == "workers")
        f.cfg.workers = static_cast<unsigned>(num("workers"));
    else if (key == "out")
        f.cfg.out_path = val;
    else if (key == "format")
        f.cfg.format = val;
    else if (key == "method")
        f.cfg.method = val;
    else if (key == "k-trunc")
        f.cfg.k_trunc = static_cast<long>(num("k-trunc"));
    else if (key == "max-attempts")
        f.cfg.max_attempts = static_cast<std::uint64_t>(num("max-attempts"));
    else if (key == "rho")
        f.cfg.rho = num("rho");
    else if (key == "sampler")
        f.cfg.sampler = val;
    else if (key == "jump-floor")
        f.cfg.jump_floor = num("jump-floor");
    else if (key == "svg")
        f.cfg.svg_path = val;
    else if (key == "regime")
        f.cfg.regime = val;
    else
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
}

void load_config_file(Flat& f, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string val = line.substr(eq + 1);
        auto vf = val.find_first_not_of(" \t");
        val = vf == std::string::npos ? "" : val.substr(vf);
        while (!val.empty() && (val.back() == ' ' || val.back() == '\t' || val.back() == '\r')) val.pop_back();
        apply_config_key(f, key, val, line_no);
    }
}

void add_common(CLI::App* sub, Flat& f, std::string& config_path) {
    sub->add_option("--config", config_path, "flat key=value config file; command line overrides");
    sub->add_option("--dist", f.cfg.dist, "distribution spec, family:key=val,...");
    sub->add_option("--n", f.n_csv, "comma list of n (block indices k for counterexample)");
    sub->add_option("--x", f.cfg.x_spec, "comma list of thresholds; suffix d for multiples of d_n");
    sub->add_option("--delta", f.cfg.delta_spec, "window: inf, a number, <a>b of b_n, or <a>psi");
    sub->add_option("--samples", f.cfg.samples, "conditional draws / MC samples per point");
    sub->add_option("--proposals", f.cfg.proposals, "proposal draws for tv estimation (default: samples)");
    sub->add_option("--seed", f.cfg.seed, "root seed (default env BIGJUMP_SEED, else 1)");
    sub->add_option("--workers", f.cfg.workers, "worker threads");
    sub->add_option("--out", f.cfg.out_path, "output file path");
    sub->add_option("--format", f.cfg.format, "csv or json (fluct only)");
    sub->add_option("--method", f.cfg.method, "exact or mc");
    sub->add_option("--k-trunc", f.cfg.k_trunc, "lattice truncation point (0 = auto)");
    sub->add_option("--max-attempts", f.cfg.max_attempts, "rejection attempt budget per batch");
    sub->add_option("--rho", f.cfg.rho, "regime classification margin");
    sub->add_option("--sampler", f.cfg.sampler, "conditional sampler: rejection or planted");
    sub->add_option("--jump-floor", f.cfg.jump_floor, "planted sampler jump floor (0 = auto)");
    sub->add_option("--svg", f.cfg.svg_path, "write an ECDF overlay plot (fluct only)");
    sub->add_option("--regime", f.cfg.regime,
                    "fluct reference: auto, stable, critical-stable[:a], uniform, critical-residual[:a], residual");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional distributions of heavy-tailed sums on large deviations"};
    app.require_subcommand(1);

    Flat flat;
    flat.cfg.seed = default_seed_from_env();
    std::string config_path;

    for (const char* name : {"ratio-scan", "tv-scan", "fluct", "counterexample", "oracle-check", "marginals-check"}) {
        auto* sub = app.add_subcommand(name, name);
        add_common(sub, flat, config_path);
        sub->callback([&flat, name] { flat.cfg.experiment = name; });
    }

    try {
        // file values first, then a second pass so flags override them
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        if (!config_path.empty()) {
            load_config_file(flat, config_path);
            for (auto* sub : app.get_subcommands()) sub->clear();
            app.clear();
            app.parse(argc, argv);
        }
        if (flat.cfg.dist.empty()) throw ConfigError("--dist is required");
        if (flat.n_csv.empty()) throw ConfigError("--n is required");
        flat.cfg.n_list = parse_n_list(flat.n_csv);
        if (flat.cfg.x_spec.empty() && flat.cfg.experiment != "counterexample")
            throw ConfigError("--x is required for this experiment");
        return run_experiment(flat.cfg);
    } catch (const CLI::ParseError& e) {
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const AttemptBudgetExhausted& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
