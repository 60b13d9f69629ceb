#pragma once

#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "bigjump/conditioning.hpp"
#include "bigjump/coordinate_swap.hpp"
#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"
#include "bigjump/rng.hpp"

namespace bigjump {

// Draw from the law of X conditioned on X in (x, x+delta_len]: inverse
// transform between the two tail levels, exact for lattice and continuous
// families alike.
inline double sample_nu_x(const Distribution& dist, double x, double delta_len, RngStream& rng) {
    double t_hi = dist.tail(x);
    double t_lo = std::isinf(delta_len) ? 0.0 : dist.tail(x + delta_len);
    double mass = t_hi - t_lo;
    if (!(mass > 0.0)) throw ZeroMassEvent("sample_nu_x: zero mass on (" + std::to_string(x) + ", +delta]");
    double t = t_lo + rng.unit_open() * mass;
    return dist.quantile_from_tail(t);
}

enum class SamplerKind { Rejection, Proposal, PlantedRejection };

inline const char* to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::Rejection: return "rejection";
        case SamplerKind::Proposal: return "proposal";
        case SamplerKind::PlantedRejection: return "planted";
    }
    return "?";
}

struct ConditionalSample {
    std::vector<std::vector<double>> vectors;
    SamplerKind kind = SamplerKind::Rejection;
    double acceptance_rate = 1.0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    ConditioningEvent event;
    std::uint64_t attempts = 0;
    // planted sampler provenance
    double jump_floor = std::numeric_limits<double>::quiet_NaN();
    double coverage_defect_ratio = 0.0;      // certified bound on the missing conditional mass
    double event_prob_estimate = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Split `total` items across workers; returns per-worker counts.
inline std::vector<std::size_t> split_counts(std::size_t total, unsigned workers) {
    if (workers == 0) workers = 1;
    std::vector<std::size_t> c(workers, total / workers);
    for (std::size_t i = 0; i < total % workers; ++i) ++c[i];
    return c;
}

}  // namespace detail

// Exact conditional sampler by plain rejection on the event {S_n in x+Delta}.
// Cost scales like 1/P[event]; the attempt budget caps a runaway run and the
// failure is surfaced instead of silently degrading the batch.
inline ConditionalSample rejection_conditional(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                               std::size_t batch, std::uint64_t seed, unsigned workers = 1,
                                               std::uint64_t max_attempts = 100000000ULL) {
    if (n < 1) throw Error("rejection_conditional: n must be >= 1");
    auto counts = detail::split_counts(batch, workers);
    std::vector<std::vector<std::vector<double>>> results(counts.size());
    std::vector<std::uint64_t> attempts(counts.size(), 0);
    std::vector<char> exhausted(counts.size(), 0);
    std::uint64_t per_worker_budget = max_attempts / (counts.size() ? counts.size() : 1);

    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        std::vector<double> v(n);
        auto& out = results[w];
        out.reserve(counts[w]);
        std::uint64_t att = 0;
        while (out.size() < counts[w]) {
            if (att >= per_worker_budget) {
                exhausted[w] = 1;
                break;
            }
            ++att;
            dist.sample_into(v, rng);
            double s = 0.0;
            for (double c : v) s += c;
            if (ev.contains(s)) out.push_back(v);
        }
        attempts[w] = att;
    };

    if (counts.size() == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < counts.size(); ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    ConditionalSample cs;
    cs.kind = SamplerKind::Rejection;
    cs.seed = seed;
    cs.n = n;
    cs.event = ev;
    for (std::size_t w = 0; w < counts.size(); ++w) {
        cs.attempts += attempts[w];
        for (auto& v : results[w]) cs.vectors.push_back(std::move(v));
    }
    cs.acceptance_rate = cs.attempts ? static_cast<double>(cs.vectors.size()) / static_cast<double>(cs.attempts) : 0.0;
    for (std::size_t w = 0; w < counts.size(); ++w)
        if (exhausted[w])
            throw AttemptBudgetExhausted("rejection_conditional: " + std::to_string(cs.vectors.size()) + "/" +
                                         std::to_string(batch) + " accepted after " + std::to_string(cs.attempts) +
                                         " attempts at event " + ev.str());
    return cs;
}

// Rejection with a fixed number of proposals: keeps whatever is accepted.
// Used when the proposal count itself is the experiment's budget.
inline ConditionalSample rejection_fixed_attempts(const Distribution& dist, std::size_t n,
                                                  const ConditioningEvent& ev, std::uint64_t attempts,
                                                  std::uint64_t seed, unsigned workers = 1) {
    if (n < 1) throw Error("rejection_fixed_attempts: n must be >= 1");
    if (workers == 0) workers = 1;
    std::vector<std::vector<std::vector<double>>> results(workers);
    std::uint64_t per_worker = attempts / workers;

    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        std::vector<double> v(n);
        auto& out = results[w];
        for (std::uint64_t i = 0; i < per_worker; ++i) {
            dist.sample_into(v, rng);
            double s = 0.0;
            for (double c : v) s += c;
            if (ev.contains(s)) out.push_back(v);
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    ConditionalSample cs;
    cs.kind = SamplerKind::Rejection;
    cs.seed = seed;
    cs.n = n;
    cs.event = ev;
    cs.attempts = per_worker * workers;
    for (auto& r : results)
        for (auto& v : r) cs.vectors.push_back(std::move(v));
    cs.acceptance_rate = static_cast<double>(cs.vectors.size()) / static_cast<double>(cs.attempts);
    return cs;
}

// The product-with-one-conditioned-coordinate proposal: n-1 independent
// draws plus one window-conditioned draw placed at a uniform position by a
// coordinate swap. O(n) per vector, nothing rejected.
inline ConditionalSample proposal_conditional(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                              std::size_t batch, std::uint64_t seed, unsigned workers = 1) {
    if (n < 1) throw Error("proposal_conditional: n must be >= 1");
    if (!(dist.interval_mass(ev.x, ev.delta_len) > 0.0))
        throw ZeroMassEvent("proposal_conditional: window has zero mass");
    auto counts = detail::split_counts(batch, workers);
    std::vector<std::vector<std::vector<double>>> results(counts.size());

    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        auto& out = results[w];
        out.reserve(counts[w]);
        for (std::size_t i = 0; i < counts[w]; ++i) {
            std::vector<double> v(n);
            if (n > 1) dist.sample_into(std::span<double>(v.data(), n - 1), rng);
            v[n - 1] = sample_nu_x(dist, ev.x, ev.delta_len, rng);
            std::size_t j = static_cast<std::size_t>(rng.below(n));
            sigma_swap_inplace(v, j);
            out.push_back(std::move(v));
        }
    };

    if (counts.size() == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < counts.size(); ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    ConditionalSample cs;
    cs.kind = SamplerKind::Proposal;
    cs.seed = seed;
    cs.n = n;
    cs.event = ev;
    for (auto& r : results)
        for (auto& v : r) cs.vectors.push_back(std::move(v));
    cs.attempts = cs.vectors.size();
    cs.acceptance_rate = 1.0;
    return cs;
}

// ---------------------------------------------------------------------------
// Densities of the conditional law and the proposal mixture with respect to
// the product law, generalized to finite windows: the indicator/count is taken
// over coordinates inside (x, x+delta].
// ---------------------------------------------------------------------------
inline std::size_t window_count(const ConditioningEvent& ev, std::span<const double> v) {
    std::size_t c = 0;
    for (double t : v)
        if (t > ev.x && t <= ev.upper()) ++c;
    return c;
}

inline double density_ratio_f1(const ConditioningEvent& ev, double event_prob, std::span<const double> v) {
    if (!(event_prob > 0.0)) throw ZeroNormalizer("density_ratio_f1: event probability must be positive");
    double s = 0.0;
    for (double t : v) s += t;
    return ev.contains(s) ? 1.0 / event_prob : 0.0;
}

inline double density_ratio_f2(const ConditioningEvent& ev, double window_mass, std::span<const double> v) {
    if (!(window_mass > 0.0)) throw ZeroNormalizer("density_ratio_f2: window mass must be positive");
    return static_cast<double>(window_count(ev, v)) / (static_cast<double>(v.size()) * window_mass);
}

// ---------------------------------------------------------------------------
// Certified bound for the planted sampler's missing mass, for continuous
// positive-support families. On the event, a vector escapes the sampler only
// when every coordinate is <= the jump floor u0; the bound splits by how many
// coordinates exceed a cut a < u0 and controls each piece by a capped-MGF
// Chernoff argument plus a localized two-jump sum.
// ---------------------------------------------------------------------------
namespace detail {

// rigorous upper bound for E[e^{theta X} 1{X <= u}] on continuous positive families
inline double capped_mgf_upper(const Distribution& dist, double theta, double u) {
    // E = 1 - e^{theta u} tail(u) + theta * I,  I = int_0^u e^{theta t} tail(t) dt
    // integrate in tau = u - t with per-cell majorants so the result is an
    // upper bound, not just an estimate
    const int cells = 2048;
    double I = 0.0;
    double tau_min = u * 1e-14;
    I += dist.tail(u - tau_min) * tau_min;  // strip at tau ~ 0, e^{-theta tau} <= 1
    double ratio = std::pow(u / tau_min, 1.0 / cells);
    double lo = tau_min;
    for (int c = 0; c < cells; ++c) {
        double hi = (c == cells - 1) ? u : lo * ratio;
        // e^{-theta tau} maximal at tau=lo; tail(u - tau) maximal at tau=hi
        I += std::exp(-theta * lo) * dist.tail(u - hi) * (hi - lo);
        lo = hi;
    }
    I *= std::exp(theta * u);
    double e = 1.0 - std::exp(theta * u) * dist.tail(u) + theta * I;
    return std::max(e, 1.0);
}

// capped-MGF machinery for one cut level: bounds P[S_m > y, all X_i <= cap]
// by min_theta e^{-theta y} E[e^{theta X} 1{X <= cap}]^m
struct CappedChernoff {
    std::vector<double> thetas, log_mgf;

    CappedChernoff(const Distribution& dist, double cap) {
        for (double thc : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
            double theta = thc / cap;
            thetas.push_back(theta);
            log_mgf.push_back(std::log(capped_mgf_upper(dist, theta, cap)));
        }
    }

    double bound(std::size_t m, double y) const {
        if (y <= 0.0) return 1.0;
        double best = 1.0;
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            double e = -thetas[i] * y + static_cast<double>(m) * log_mgf[i];
            if (e < 0.0) best = std::min(best, std::exp(e));
        }
        return best;
    }
};

// P[sum of m coordinates, each <= a, exceeds D]: either every coordinate is
// below a sub-cut b (capped Chernoff at b) or some coordinate lands in (b, a]
// (union bound). The sub-cuts adapt to the deficit so a mid-size jump gets
// charged its real tail price instead of a loose exponential.
struct RestBound {
    const Distribution& dist;
    double a;
    std::vector<double> cuts;
    std::vector<CappedChernoff> chs;

    RestBound(const Distribution& d, double a_, double deficit_hint) : dist(d), a(a_) {
        auto add = [&](double b) {
            b = std::min(b, a);
            if (b <= dist.lower_bound() * 1.01 + 1e-12) return;
            for (double c : cuts)
                if (std::fabs(c - b) < 1e-9 * b) return;
            cuts.push_back(b);
            chs.emplace_back(dist, b);
        };
        add(a);
        add(a / 4.0);
        add(a / 16.0);
        add(a / 64.0);
        if (deficit_hint > 0.0) {
            add(deficit_hint / 4.0);
            add(deficit_hint / 16.0);
        }
    }

    double operator()(std::size_t m, double D) const {
        if (D <= 0.0) return 1.0;
        double best = 1.0;
        double tail_a = dist.tail(a);
        for (std::size_t i = 0; i < cuts.size(); ++i) {
            double jump_in = static_cast<double>(m) * std::max(0.0, dist.tail(cuts[i]) - tail_a);
            best = std::min(best, chs[i].bound(m, D) + (cuts[i] < a ? jump_in : 0.0));
        }
        return best;
    }
};

}  // namespace detail

// Certified upper bound on P[S_n in event, all coordinates <= u0]: the
// probability mass the planted sampler cannot reach. Splits by the number of
// coordinates above a cut a < u0; the one- and two-jump channels are
// localized in the jump size so polynomial tails keep their small factors.
inline double planted_coverage_numerator(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                         double u0) {
    if (dist.is_lattice()) throw Error("planted_coverage_numerator: use the lattice sampler for lattice laws");
    const double x = ev.x;
    const double nd = static_cast<double>(n);
    const double mean = dist.mean().value_or(0.0);
    const double sigma = std::sqrt(std::max(dist.variance().value_or(1.0), 0.0));
    const double pairs = 0.5 * nd * (nd - 1.0);
    double best = 1.0;
    for (double frac : {0.0625, 0.125, 0.25, 0.5}) {
        double a = std::max(u0 * frac, dist.lower_bound() * 1.5 + 1e-9);
        if (a >= u0) continue;
        detail::RestBound rest(dist, a, x - u0);
        // all coordinates below the cut
        double term0 = rest(n, x);
        // rest-of-vector allowance and the chance the capped rest exceeds it
        double rest_allow = nd * mean + std::max(16.0 * sigma * std::sqrt(nd), 0.5 * std::max(x - u0 - nd * mean, 0.0));
        double rest_exceed = rest(n >= 2 ? n - 2 : 0, rest_allow);
        double hard_cap = (nd - 2.0) * a;  // capped rest can never exceed this

        double term1 = 0.0, pair_loc = 0.0, pair_far = 0.0;
        const int cells = 768;
        double r = std::pow(u0 / a, 1.0 / cells);
        double lo = a;
        for (int c = 0; c < cells; ++c) {
            double hi = (c == cells - 1) ? u0 : lo * r;
            double cell_mass = dist.tail(lo) - dist.tail(hi);
            if (cell_mass > 0.0) {
                // one jump in this cell, everything else below the cut
                term1 += cell_mass * rest(n >= 1 ? n - 1 : 0, x - hi);
                // second jump needed: rest within its allowance
                double p_lo = std::max(a, x - hi - rest_allow);
                double p_hi = std::min(u0, ev.finite() ? ev.upper() - lo : kInf);
                if (p_hi > p_lo) pair_loc += cell_mass * (dist.tail(p_lo) - dist.tail(p_hi));
                // or an oversized rest, still hard-capped at (n-2)a
                double q_lo = std::max(a, x - hi - hard_cap);
                if (u0 > q_lo) pair_far += cell_mass * (dist.tail(q_lo) - dist.tail(u0));
            }
            lo = hi;
        }
        double cov = term0 + nd * term1 + pairs * (pair_loc + pair_far * rest_exceed);
        best = std::min(best, cov);
    }
    return best;
}

// Exact sampler for the conditional law restricted to {max > jump_floor}: one
// coordinate planted in the window (jump_floor, x+delta], placed uniformly,
// accepted with probability 1/#{coordinates in that window}. With the floor
// below every value the event can realistically use, the restriction loses
// only the certified coverage defect.
inline ConditionalSample planted_conditional(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                             double jump_floor, std::size_t batch, std::uint64_t seed,
                                             unsigned workers = 1, std::uint64_t max_attempts = 1000000000ULL) {
    if (n < 1) throw Error("planted_conditional: n must be >= 1");
    const double win_hi = ev.upper();
    if (!(jump_floor < win_hi)) throw Error("planted_conditional: jump floor above the window");
    double t_floor = dist.tail(jump_floor);
    double t_hi = ev.finite() ? dist.tail(win_hi) : 0.0;
    double window_mass = t_floor - t_hi;
    if (!(window_mass > 0.0)) throw ZeroMassEvent("planted_conditional: window has zero mass");

    auto counts = detail::split_counts(batch, workers);
    std::vector<std::vector<std::vector<double>>> results(counts.size());
    std::vector<std::uint64_t> attempts(counts.size(), 0);
    std::vector<char> exhausted(counts.size(), 0);
    std::uint64_t per_worker_budget = max_attempts / (counts.size() ? counts.size() : 1);

    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        auto& out = results[w];
        out.reserve(counts[w]);
        std::vector<double> v(n);
        std::uint64_t att = 0;
        while (out.size() < counts[w]) {
            if (att >= per_worker_budget) {
                exhausted[w] = 1;
                break;
            }
            ++att;
            if (n > 1) dist.sample_into(std::span<double>(v.data(), n - 1), rng);
            double t = t_hi + rng.unit_open() * window_mass;
            v[n - 1] = dist.quantile_from_tail(t);
            std::size_t j = static_cast<std::size_t>(rng.below(n));
            std::swap(v[j], v[n - 1]);
            double s = 0.0;
            std::size_t nw = 0;
            for (double c : v) {
                s += c;
                if (c > jump_floor && c <= win_hi) ++nw;
            }
            if (!ev.contains(s)) continue;
            if (nw > 1 && rng.below(nw) != 0) continue;  // accept w.p. 1/N exactly
            out.push_back(v);
        }
        attempts[w] = att;
    };

    if (counts.size() == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < counts.size(); ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    ConditionalSample cs;
    cs.kind = SamplerKind::PlantedRejection;
    cs.seed = seed;
    cs.n = n;
    cs.event = ev;
    cs.jump_floor = jump_floor;
    for (std::size_t w = 0; w < counts.size(); ++w) {
        cs.attempts += attempts[w];
        for (auto& v : results[w]) cs.vectors.push_back(std::move(v));
    }
    cs.acceptance_rate = cs.attempts ? static_cast<double>(cs.vectors.size()) / static_cast<double>(cs.attempts) : 0.0;
    for (std::size_t w = 0; w < counts.size(); ++w)
        if (exhausted[w])
            throw AttemptBudgetExhausted("planted_conditional: " + std::to_string(cs.vectors.size()) + "/" +
                                         std::to_string(batch) + " accepted at event " + ev.str());
    // acceptance estimates P[S in event, some coord in window] / (n * window mass)
    cs.event_prob_estimate = static_cast<double>(n) * window_mass * cs.acceptance_rate;
    if (!dist.is_lattice() && cs.event_prob_estimate > 0.0) {
        double numer = planted_coverage_numerator(dist, n, ev, jump_floor);
        // capped at 1: beyond that the bound certifies nothing and empirical
        // cross-checks against exact samplers carry the argument
        cs.coverage_defect_ratio = std::min(1.0, numer / cs.event_prob_estimate);
    }
    return cs;
}

// Rule-of-thumb jump floor: clear the bulk of the other n-1 coordinates plus
// a margin wide enough that a second jump reaching it is negligible (tail
// beyond the margin below 1e-10/n), but never more than half the available
// room above the bulk.
inline double suggest_jump_floor(const Distribution& dist, std::size_t n, const ConditioningEvent& ev) {
    double mean = dist.mean().value_or(0.0);
    double bulk = mean * static_cast<double>(n);
    double room = ev.x - bulk;
    if (room <= 0.0) throw Error("suggest_jump_floor: event threshold inside the bulk");
    double margin = std::min(dist.quantile_from_tail(1e-10 / static_cast<double>(n)), 0.5 * room);
    return ev.x - bulk - margin;
}

}  // namespace bigjump
