#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bigjump/conditioning.hpp"
#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"
#include "bigjump/samplers.hpp"
#include "bigjump/stat_tests.hpp"
#include "bigjump/thresholds.hpp"

namespace bigjump {

// The five windows of the conditional-maximum picture, ordered by |Delta|
// relative to the sum scale b_n and the residual scale psi(x).
enum class Regime { StableNegH, CriticalStable, Uniform, CriticalResidual, ResidualLambda };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::StableNegH: return "stable-neg-h";
        case Regime::CriticalStable: return "critical-stable";
        case Regime::Uniform: return "uniform";
        case Regime::CriticalResidual: return "critical-residual";
        case Regime::ResidualLambda: return "residual-lambda";
    }
    return "?";
}

struct RegimeCall {
    Regime regime;
    double a = 0.0;  // critical-scale multiplier where applicable
};

// Band classification with margin rho; a |Delta| between bands is refused
// rather than guessed.
inline RegimeCall classify_regime(const Distribution& dist, std::size_t n, const ConditioningEvent& ev, double rho) {
    if (!(rho > 2.0)) throw Error("classify_regime: rho must exceed 2");
    if (!ev.finite()) return {Regime::ResidualLambda, 0.0};
    double len = ev.delta_len;
    double b = sum_normalization(dist, n).b_n;
    double psi = residual_scale_psi(dist, ev.x);
    if (len <= b / rho) return {Regime::StableNegH, 0.0};
    if (len >= 0.5 * b && len <= 2.0 * b) return {Regime::CriticalStable, len / b};
    if (len >= rho * b && len <= psi / rho) return {Regime::Uniform, 0.0};
    if (len >= 0.5 * psi && len <= 2.0 * psi) return {Regime::CriticalResidual, len / psi};
    if (len >= rho * psi) return {Regime::ResidualLambda, 0.0};
    throw AmbiguousScale("classify_regime: |Delta|=" + std::to_string(len) + " between bands (b_n=" +
                         std::to_string(b) + ", psi=" + std::to_string(psi) + ", rho=" + std::to_string(rho) + ")");
}

// How to turn M_n - x into the regime's pivotal statistic.
struct NormalizationPlan {
    double scale = 1.0;
    double centering = 0.0;  // added to M_n - x before scaling (stable-type regimes)
    double b_n = 1.0;
    double psi_x = 1.0;
};

inline NormalizationPlan make_plan(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                   const RegimeCall& call) {
    NormalizationPlan plan;
    plan.b_n = n >= 2 ? sum_normalization(dist, n).b_n : 1.0;
    plan.psi_x = residual_scale_psi(dist, ev.x);
    switch (call.regime) {
        case Regime::StableNegH:
            plan.scale = 1.0;  // compared two-sample against -S_{n-1} + U|Delta|, both raw
            break;
        case Regime::CriticalStable:
            plan.scale = plan.b_n;
            plan.centering = static_cast<double>(n - 1) * dist.mean().value_or(0.0);
            break;
        case Regime::Uniform:
            plan.scale = ev.delta_len;
            break;
        case Regime::CriticalResidual:
        case Regime::ResidualLambda:
            plan.scale = plan.psi_x;
            break;
    }
    if (!(plan.scale > 0.0)) throw Error("make_plan: nonpositive scale");
    return plan;
}

// Scaled max fluctuations of a conditional batch; every draw is checked
// against the event identity before use.
inline std::vector<double> max_fluct_sample(const ConditionalSample& cond, const NormalizationPlan& plan) {
    std::vector<double> out;
    out.reserve(cond.vectors.size());
    for (const auto& v : cond.vectors) {
        double s = 0.0, m = v[0];
        for (double c : v) {
            s += c;
            m = std::max(m, c);
        }
        if (!cond.event.contains(s))
            throw Error("max_fluct_sample: draw violates the conditioning event");
        out.push_back((m - cond.event.x + plan.centering) / plan.scale);
    }
    return out;
}

// Reference law for a regime: a closed-form CDF where one exists, otherwise a
// simulated sample (stable-type regimes never evaluate a stable CDF).
struct RegimeReference {
    std::function<double(double)> cdf;  // set for Uniform / residual regimes
    std::vector<double> sample;         // set for stable-type regimes
    std::string description;
    bool simulated = false;
};

inline std::function<double(double)> residual_limit_cdf(const Distribution& dist) {
    if (dist.mda_class() == MdaClass::Frechet) {
        double alpha = dist.tail_index().value_or(0.0);
        if (!(alpha > 0.0)) throw NoMdaClass("residual_limit_cdf: missing tail index");
        return [alpha](double u) { return u <= 0.0 ? 0.0 : 1.0 - std::pow(1.0 + u, -alpha); };
    }
    if (dist.mda_class() == MdaClass::Gumbel)
        return [](double u) { return u <= 0.0 ? 0.0 : 1.0 - std::exp(-u); };
    throw NoMdaClass("residual_limit_cdf: no max-domain of attraction");
}

inline RegimeReference reference_for(const RegimeCall& call, const Distribution& dist, std::size_t n,
                                     const ConditioningEvent& ev, std::size_t batch, std::uint64_t seed,
                                     unsigned workers = 1) {
    RegimeReference ref;
    switch (call.regime) {
        case Regime::ResidualLambda: {
            ref.cdf = residual_limit_cdf(dist);
            ref.description = dist.mda_class() == MdaClass::Frechet ? "residual pareto 1-(1+u)^-alpha"
                                                                    : "unit exponential 1-e^-u";
            return ref;
        }
        case Regime::CriticalResidual: {
            auto lambda = residual_limit_cdf(dist);
            double a = call.a;
            double la = lambda(a);
            if (!(la > 0.0)) throw Error("reference_for: degenerate conditioned residual");
            ref.cdf = [lambda, a, la](double u) { return u >= a ? 1.0 : lambda(u) / la; };
            ref.description = "residual law conditioned below a=" + std::to_string(a);
            return ref;
        }
        case Regime::Uniform: {
            ref.cdf = [](double u) { return u <= 0.0 ? 0.0 : (u >= 1.0 ? 1.0 : u); };
            ref.description = "uniform on [0,1]";
            return ref;
        }
        case Regime::StableNegH:
        case Regime::CriticalStable: {
            // simulate the unconditioned sum of n-1 coordinates
            ref.simulated = true;
            auto norm = sum_normalization(dist, n);
            auto counts = detail::split_counts(batch, workers);
            std::vector<std::vector<double>> parts(counts.size());
            auto work = [&](std::size_t w) {
                RngStream rng(seed, w);
                std::vector<double> v(n - 1);
                auto& out = parts[w];
                out.reserve(counts[w]);
                for (std::size_t i = 0; i < counts[w]; ++i) {
                    dist.sample_into(v, rng);
                    double s = 0.0;
                    for (double c : v) s += c;
                    double u = rng.unit_open();
                    if (call.regime == Regime::StableNegH) {
                        out.push_back(-s + u * ev.delta_len);
                    } else {
                        out.push_back(call.a * u - (s - norm.centering) / norm.b_n);
                    }
                }
            };
            if (counts.size() == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < counts.size(); ++w) pool.emplace_back(work, w);
                for (auto& t : pool) t.join();
            }
            for (auto& p : parts)
                for (double v : p) ref.sample.push_back(v);
            ref.description = call.regime == Regime::StableNegH
                                  ? "simulated -S_{n-1} + U|Delta|"
                                  : "simulated aU - (S_{n-1} - (n-1)mean)/b_n, a=" + std::to_string(call.a);
            return ref;
        }
    }
    throw Error("reference_for: unreachable");
}

// Predicted limit plus the measured KS distance for one experiment.
struct RegimeVerdict {
    Regime regime;
    double a = 0.0;
    double scale = 1.0;
    std::string reference;
    double ks_stat = 1.0;
    std::size_t cond_samples = 0;
    std::size_t ref_samples = 0;
    SamplerKind sampler = SamplerKind::Rejection;
    double acceptance_rate = 1.0;
    double coverage_defect_ratio = 0.0;
};

inline RegimeVerdict run_regime_check(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                      const RegimeCall& call, const ConditionalSample& cond, std::size_t ref_batch,
                                      std::uint64_t seed, unsigned workers = 1) {
    NormalizationPlan plan = make_plan(dist, n, ev, call);
    auto fl = max_fluct_sample(cond, plan);
    auto ref = reference_for(call, dist, n, ev, ref_batch, derive_seed(seed, 0xef), workers);
    RegimeVerdict verdict;
    verdict.regime = call.regime;
    verdict.a = call.a;
    verdict.scale = plan.scale;
    verdict.reference = ref.description;
    verdict.cond_samples = fl.size();
    verdict.sampler = cond.kind;
    verdict.acceptance_rate = cond.acceptance_rate;
    verdict.coverage_defect_ratio = cond.coverage_defect_ratio;
    if (ref.simulated) {
        verdict.ref_samples = ref.sample.size();
        verdict.ks_stat = ks_two_sample(fl, ref.sample);
    } else {
        verdict.ks_stat = ks_one_sample(fl, ref.cdf);
    }
    return verdict;
}

inline RegimeVerdict run_regime_check(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                      double rho, const ConditionalSample& cond, std::size_t ref_batch,
                                      std::uint64_t seed, unsigned workers = 1) {
    return run_regime_check(dist, n, ev, classify_regime(dist, n, ev, rho), cond, ref_batch, seed, workers);
}

// mu[x_n + |Delta_n| [w_lo, w_hi)] / mu[x_n + Delta_n] at the block scales
// x_n = d_k, Delta_n = (0, c_k]. On the gap window [eps, 1) this is exactly 0.
inline double counterexample_mass_ratio(const Counterexample& ce, std::size_t k, double w_lo, double w_hi) {
    double x = ce.block_start(k);
    double len = ce.block_interval(k);
    double denom = ce.tail(x) - ce.tail(x + len);
    if (!(denom > 0.0)) throw Error("counterexample_mass_ratio: empty block");
    double numer = ce.tail(x + w_lo * len) - ce.tail(x + w_hi * len);
    return numer / denom;
}

}  // namespace bigjump
