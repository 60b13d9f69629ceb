#pragma once

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"
#include "bigjump/fluctuations.hpp"
#include "bigjump/lattice_pmf.hpp"
#include "bigjump/report.hpp"
#include "bigjump/samplers.hpp"
#include "bigjump/thresholds.hpp"
#include "bigjump/tv_analysis.hpp"

namespace bigjump {

struct ExperimentConfig {
    std::string experiment;
    std::string dist;
    std::vector<std::size_t> n_list;  // block indices k for the counterexample experiment
    std::string x_spec;               // comma list; entries ending in 'd' are multiples of d_n
    std::string delta_spec = "inf";   // "inf", absolute, "<a>b" of b_n, or "<a>psi" of psi(x)
    std::size_t samples = 10000;
    std::size_t proposals = 0;  // 0 -> same as samples
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out_path;
    std::string format = "csv";  // csv | json
    std::string method = "mc";   // mc | exact
    long k_trunc = 0;            // lattice truncation; 0 -> per-experiment default
    std::uint64_t max_attempts = 100000000ULL;
    double rho = 10.0;
    std::string sampler = "rejection";  // rejection | planted
    double jump_floor = 0.0;            // 0 -> suggest automatically
    std::string svg_path;
    std::string regime = "auto";  // auto | stable | critical-stable:<a> | uniform | critical-residual:<a> | residual
};

inline std::uint64_t default_seed_from_env() {
    if (const char* s = std::getenv("BIGJUMP_SEED")) {
        try {
            return static_cast<std::uint64_t>(std::stoull(s));
        } catch (const std::exception&) {
            throw ConfigError("BIGJUMP_SEED is not an integer");
        }
    }
    return 1;
}

namespace detail {

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + what + ": '" + s + "'");
    }
}

}  // namespace detail

inline std::vector<std::size_t> parse_n_list(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& item : detail::split_commas(s)) {
        double v = detail::parse_double(item, "n");
        if (v < 1 || v != std::floor(v)) throw ConfigError("n entries must be positive integers: '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError("empty n list");
    return out;
}

// entries ending in 'd' scale the threshold d_n, so the grid can depend on n
inline std::vector<double> resolve_x_grid(const Distribution& dist, std::size_t n, const std::string& x_spec) {
    std::vector<double> out;
    for (auto item : detail::split_commas(x_spec)) {
        if (!item.empty() && (item.back() == 'd' || item.back() == 'D')) {
            double c = detail::parse_double(item.substr(0, item.size() - 1), "x multiplier");
            out.push_back(c * d_n(dist, n));
        } else {
            out.push_back(detail::parse_double(item, "x"));
        }
    }
    if (out.empty()) throw ConfigError("empty x grid");
    return out;
}

inline double resolve_delta(const Distribution& dist, std::size_t n, double x, const std::string& delta_spec) {
    if (delta_spec == "inf" || delta_spec == "INF") return kInf;
    if (delta_spec.size() > 3 && delta_spec.substr(delta_spec.size() - 3) == "psi") {
        double a = detail::parse_double(delta_spec.substr(0, delta_spec.size() - 3), "delta psi multiplier");
        return a * residual_scale_psi(dist, x);
    }
    if (!delta_spec.empty() && (delta_spec.back() == 'b' || delta_spec.back() == 'B')) {
        double a = detail::parse_double(delta_spec.substr(0, delta_spec.size() - 1), "delta b_n multiplier");
        return a * sum_normalization(dist, n).b_n;
    }
    double v = detail::parse_double(delta_spec, "delta");
    if (!(v > 0.0)) throw ConfigError("delta must be positive or 'inf'");
    return v;
}

inline RegimeCall resolve_regime(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                 const ExperimentConfig& cfg) {
    if (cfg.regime == "auto") return classify_regime(dist, n, ev, cfg.rho);
    auto with_a = [&](const std::string& name) -> std::optional<double> {
        if (cfg.regime.rfind(name + ":", 0) == 0)
            return detail::parse_double(cfg.regime.substr(name.size() + 1), "regime multiplier");
        if (cfg.regime == name) return 0.0;
        return std::nullopt;
    };
    if (cfg.regime == "stable") return {Regime::StableNegH, 0.0};
    if (cfg.regime == "uniform") return {Regime::Uniform, 0.0};
    if (cfg.regime == "residual") return {Regime::ResidualLambda, 0.0};
    if (auto a = with_a("critical-stable")) {
        double v = *a > 0.0 ? *a : ev.delta_len / sum_normalization(dist, n).b_n;
        return {Regime::CriticalStable, v};
    }
    if (auto a = with_a("critical-residual")) {
        double v = *a > 0.0 ? *a : ev.delta_len / residual_scale_psi(dist, ev.x);
        return {Regime::CriticalResidual, v};
    }
    throw ConfigError("unknown regime '" + cfg.regime + "'");
}

inline ConditionalSample draw_conditional(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                          const ExperimentConfig& cfg, std::uint64_t stream) {
    std::uint64_t seed = derive_seed(cfg.seed, stream);
    if (cfg.sampler == "planted") {
        double floor = cfg.jump_floor > 0.0 ? cfg.jump_floor : suggest_jump_floor(dist, n, ev);
        return planted_conditional(dist, n, ev, floor, cfg.samples, seed, cfg.workers, cfg.max_attempts);
    }
    if (cfg.sampler != "rejection") throw ConfigError("unknown sampler '" + cfg.sampler + "'");
    return rejection_conditional(dist, n, ev, cfg.samples, seed, cfg.workers, cfg.max_attempts);
}

inline long auto_k_trunc(const ExperimentConfig& cfg, double max_x, double delta_len) {
    if (cfg.k_trunc > 0) return cfg.k_trunc;
    if (cfg.experiment == "oracle-check") return 60;
    double upper = max_x + (std::isinf(delta_len) ? 0.0 : delta_len);
    return static_cast<long>(std::max(400.0, 20.0 * upper));
}

inline void write_common_provenance(CsvWriter& csv, const ExperimentConfig& cfg) {
    csv.provenance("tool", "bigjump " + cfg.experiment);
    csv.provenance("dist", cfg.dist);
    csv.provenance("delta", cfg.delta_spec);
    csv.provenance("samples", std::to_string(cfg.samples));
    csv.provenance("seed", std::to_string(cfg.seed));
    csv.provenance("workers", std::to_string(cfg.workers));
    csv.provenance("sampler", cfg.sampler);
    csv.provenance("method", cfg.method);
    csv.timestamp();
}

// ---------------------------------------------------------------------------
// runners; each returns a process exit code
// ---------------------------------------------------------------------------
inline int run_ratio_scan(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    std::vector<RatioRow> rows;
    for (std::size_t n : cfg.n_list) {
        auto xs = resolve_x_grid(*dist, n, cfg.x_spec);
        double delta = resolve_delta(*dist, n, xs.front(), cfg.delta_spec);
        if (cfg.method == "exact") {
            if (!dist->is_lattice()) throw ConfigError("ratio-scan: exact method needs a lattice family");
            double mx = *std::max_element(xs.begin(), xs.end());
            Pmf p = Pmf::from_lattice(*dist, auto_k_trunc(cfg, mx, delta));
            auto r = ratio_scan_exact(p, {n}, xs, delta);
            rows.insert(rows.end(), r.begin(), r.end());
        } else {
            auto r = ratio_scan_mc(*dist, {n}, xs, delta, cfg.samples, cfg.seed, cfg.workers);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    if (!cfg.out_path.empty()) {
        CsvWriter csv(cfg.out_path);
        write_common_provenance(csv, cfg);
        csv.header({"n", "x", "prob_sum", "n_times_tail", "ratio", "abs_err", "stderr", "exact"});
        for (const auto& r : rows)
            csv.row({std::to_string(r.n), fmt_num(r.x), fmt_num(r.prob_sum), fmt_num(r.n_times_tail),
                     fmt_num(r.ratio), fmt_num(r.abs_err), fmt_num(r.stderr_ratio), r.exact ? "1" : "0"});
    }
    for (const auto& r : rows)
        std::cout << "n=" << r.n << " x=" << fmt_num(r.x) << " ratio=" << fmt_num(r.ratio)
                  << " |ratio-1|=" << fmt_num(r.abs_err) << (r.exact ? " (exact)" : "") << "\n";
    return 0;
}

inline int run_tv_scan(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    struct OutRow {
        std::size_t n;
        double x, delta;
        TvReport rep;
    };
    std::vector<OutRow> rows;
    std::uint64_t stream = 0;
    for (std::size_t n : cfg.n_list) {
        for (double x : resolve_x_grid(*dist, n, cfg.x_spec)) {
            double delta = resolve_delta(*dist, n, x, cfg.delta_spec);
            ConditioningEvent ev(x, delta);
            TvReport rep;
            if (cfg.method == "exact") {
                if (!dist->is_lattice()) throw ConfigError("tv-scan: exact method needs a lattice family");
                Pmf p = Pmf::from_lattice(*dist, auto_k_trunc(cfg, x, delta));
                rep = tv_decomposition_exact(p, n, ev);
            } else {
                auto cond = draw_conditional(*dist, n, ev, cfg, ++stream);
                std::size_t props = cfg.proposals ? cfg.proposals : cfg.samples;
                rep = tv_decomposition_mc(*dist, n, ev, cond, props, derive_seed(cfg.seed, ++stream), cfg.workers);
            }
            rows.push_back({n, x, delta, rep});
        }
    }
    if (!cfg.out_path.empty()) {
        CsvWriter csv(cfg.out_path);
        write_common_provenance(csv, cfg);
        csv.header({"n", "x", "delta", "term_ratio", "term_collective", "tv_l1", "tv_sup", "se_ratio",
                    "se_collective", "accept_rate"});
        for (const auto& r : rows)
            csv.row({std::to_string(r.n), fmt_num(r.x), fmt_num(r.delta), fmt_num(r.rep.term_ratio),
                     fmt_num(r.rep.term_collective), fmt_num(r.rep.tv_l1), fmt_num(r.rep.tv_sup),
                     fmt_num(r.rep.se_ratio), fmt_num(r.rep.se_collective), fmt_num(r.rep.accept_rate)});
    }
    for (const auto& r : rows)
        std::cout << "n=" << r.n << " x=" << fmt_num(r.x) << " tv_sup=" << fmt_num(r.rep.tv_sup)
                  << " (ratio term " << fmt_num(r.rep.term_ratio) << ", collective " << fmt_num(r.rep.term_collective)
                  << ")" << (r.rep.exact ? " (exact)" : "") << "\n";
    return 0;
}

inline int run_fluct(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    std::size_t n = cfg.n_list.front();
    double x = resolve_x_grid(*dist, n, cfg.x_spec).front();
    double delta = resolve_delta(*dist, n, x, cfg.delta_spec);
    ConditioningEvent ev(x, delta);
    auto call = resolve_regime(*dist, n, ev, cfg);
    auto cond = draw_conditional(*dist, n, ev, cfg, 11);
    auto verdict = run_regime_check(*dist, n, ev, call, cond, cfg.samples, derive_seed(cfg.seed, 12), cfg.workers);

    nlohmann::json j{{"dist", cfg.dist},
                     {"n", n},
                     {"x", x},
                     {"delta", std::isinf(delta) ? -1.0 : delta},
                     {"regime", to_string(verdict.regime)},
                     {"a", verdict.a},
                     {"scale", verdict.scale},
                     {"reference", verdict.reference},
                     {"ks_stat", verdict.ks_stat},
                     {"cond_samples", verdict.cond_samples},
                     {"ref_samples", verdict.ref_samples},
                     {"sampler", to_string(verdict.sampler)},
                     {"acceptance_rate", verdict.acceptance_rate},
                     {"coverage_defect_ratio", verdict.coverage_defect_ratio},
                     {"seed", cfg.seed}};
    if (!cfg.out_path.empty()) {
        if (cfg.format == "json") {
            std::ofstream out(cfg.out_path);
            if (!out) throw Error("cannot open output file: " + cfg.out_path);
            out << j.dump(2) << "\n";
        } else {
            CsvWriter csv(cfg.out_path);
            write_common_provenance(csv, cfg);
            csv.header({"n", "x", "delta", "regime", "scale", "ks_stat", "cond_samples", "ref_samples", "seed"});
            csv.row({std::to_string(n), fmt_num(x), std::isinf(delta) ? "inf" : fmt_num(delta),
                     to_string(verdict.regime), fmt_num(verdict.scale), fmt_num(verdict.ks_stat),
                     std::to_string(verdict.cond_samples), std::to_string(verdict.ref_samples),
                     std::to_string(cfg.seed)});
        }
    }
    if (!cfg.svg_path.empty()) {
        auto plan = make_plan(*dist, n, ev, call);
        auto fl = max_fluct_sample(cond, plan);
        auto ref = reference_for({verdict.regime, verdict.a}, *dist, n, ev, cfg.samples,
                                 derive_seed(cfg.seed, 13), cfg.workers);
        std::function<double(double)> curve;
        if (ref.simulated) {
            auto sorted = ref.sample;
            std::sort(sorted.begin(), sorted.end());
            curve = [sorted](double t) {
                auto it = std::upper_bound(sorted.begin(), sorted.end(), t);
                return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
            };
        } else {
            curve = ref.cdf;
        }
        svg_ecdf_overlay(cfg.svg_path, fl, curve,
                         cfg.dist + " n=" + std::to_string(n) + " " + to_string(verdict.regime));
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

inline int run_counterexample(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    auto ce = std::dynamic_pointer_cast<const Counterexample>(dist);
    if (!ce) throw ConfigError("counterexample experiment needs a counterexample distribution");
    double eps = ce->params().eps;
    struct Row {
        std::size_t k;
        double x, delta, w_lo, w_hi, ratio;
    };
    std::vector<Row> rows;
    for (std::size_t k : cfg.n_list) {
        for (auto [w_lo, w_hi] : std::vector<std::pair<double, double>>{{eps, 1.0}, {0.0, eps}, {eps / 2.0, eps}}) {
            rows.push_back({k, ce->block_start(k), ce->block_interval(k), w_lo, w_hi,
                            counterexample_mass_ratio(*ce, k, w_lo, w_hi)});
        }
    }
    if (!cfg.out_path.empty()) {
        CsvWriter csv(cfg.out_path);
        write_common_provenance(csv, cfg);
        csv.header({"k", "x", "delta", "window_lo", "window_hi", "ratio", "uniform_prediction"});
        for (const auto& r : rows)
            csv.row({std::to_string(r.k), fmt_num(r.x), fmt_num(r.delta), fmt_num(r.w_lo), fmt_num(r.w_hi),
                     fmt_num(r.ratio), fmt_num(r.w_hi - r.w_lo)});
    }
    for (const auto& r : rows)
        std::cout << "k=" << r.k << " x=" << fmt_num(r.x) << " window=[" << fmt_num(r.w_lo) << "," << fmt_num(r.w_hi)
                  << ") ratio=" << fmt_num(r.ratio) << " vs uniform " << fmt_num(r.w_hi - r.w_lo) << "\n";
    return 0;
}

inline int run_oracle_check(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    if (!dist->is_lattice()) throw ConfigError("oracle-check needs a lattice family");
    std::size_t n = cfg.n_list.front();
    double x = resolve_x_grid(*dist, n, cfg.x_spec).front();
    double delta = resolve_delta(*dist, n, x, cfg.delta_spec);
    ConditioningEvent ev(x, delta);
    Pmf p = Pmf::from_lattice(*dist, auto_k_trunc(cfg, x, delta));
    auto enum_tv = exact_tv(p, n, ev);
    auto rep = tv_decomposition_exact(p, n, ev);
    double diff = std::fabs(enum_tv.tv_l1 - rep.tv_l1);
    std::cout << "enumeration tv_l1=" << fmt_num(enum_tv.tv_l1) << " tv_sup=" << fmt_num(enum_tv.tv_sup) << "\n"
              << "decomposition tv_l1=" << fmt_num(rep.tv_l1) << " tv_sup=" << fmt_num(rep.tv_sup) << "\n"
              << "|difference|=" << fmt_num(diff) << " (ratio=" << fmt_num(rep.ratio) << ")\n";
    return diff < 1e-8 ? 0 : 4;
}

inline int run_marginals_check(const ExperimentConfig& cfg) {
    auto dist = make_distribution(cfg.dist);
    std::size_t n = cfg.n_list.front();
    double x = resolve_x_grid(*dist, n, cfg.x_spec).front();
    double delta = resolve_delta(*dist, n, x, cfg.delta_spec);
    ConditioningEvent ev(x, delta);
    auto cond = draw_conditional(*dist, n, ev, cfg, 21);
    auto rep = smallest_marginals_check(*dist, cond);
    if (!cfg.out_path.empty()) {
        CsvWriter csv(cfg.out_path);
        write_common_provenance(csv, cfg);
        csv.header({"n", "x", "delta", "coord", "ks_stat", "batch", "max_abs_corr", "corr_se", "seed"});
        for (std::size_t k = 0; k < rep.ks_per_coord.size(); ++k)
            csv.row({std::to_string(n), fmt_num(x), std::isinf(delta) ? "inf" : fmt_num(delta), std::to_string(k),
                     fmt_num(rep.ks_per_coord[k]), std::to_string(rep.batch), fmt_num(rep.max_abs_corr),
                     fmt_num(rep.corr_std_error), std::to_string(cfg.seed)});
    }
    double worst = *std::max_element(rep.ks_per_coord.begin(), rep.ks_per_coord.end());
    std::cout << "batch=" << rep.batch << " worst coordinate KS=" << fmt_num(worst)
              << " max |corr|=" << fmt_num(rep.max_abs_corr) << " (+/- " << fmt_num(rep.corr_std_error) << ")\n";
    return 0;
}

inline int run_experiment(const ExperimentConfig& cfg) {
    if (cfg.experiment == "ratio-scan") return run_ratio_scan(cfg);
    if (cfg.experiment == "tv-scan") return run_tv_scan(cfg);
    if (cfg.experiment == "fluct") return run_fluct(cfg);
    if (cfg.experiment == "counterexample") return run_counterexample(cfg);
    if (cfg.experiment == "oracle-check") return run_oracle_check(cfg);
    if (cfg.experiment == "marginals-check") return run_marginals_check(cfg);
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace bigjump
