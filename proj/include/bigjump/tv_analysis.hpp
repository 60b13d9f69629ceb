#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "bigjump/conditioning.hpp"
#include "bigjump/coordinate_swap.hpp"
#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"
#include "bigjump/lattice_pmf.hpp"
#include "bigjump/samplers.hpp"
#include "bigjump/stat_tests.hpp"

namespace bigjump {

struct ProbEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = false;
};

// P[S_n in x + Delta], exactly via lattice convolution
inline ProbEstimate sum_tail_exact(const Pmf& p, std::size_t n, const ConditioningEvent& ev) {
    Pmf sn = convolve_n(p, n);
    return {sn.event_mass(ev), 0.0, true};
}

// ... or by plain Monte Carlo over product draws
inline ProbEstimate sum_tail_mc(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                std::size_t samples, std::uint64_t seed, unsigned workers = 1) {
    if (samples < 1000) throw Error("sum_tail_mc: use at least 1e3 samples");
    auto counts = detail::split_counts(samples, workers);
    std::vector<std::size_t> hits(counts.size(), 0);
    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        std::vector<double> v(n);
        std::size_t h = 0;
        for (std::size_t i = 0; i < counts[w]; ++i) {
            dist.sample_into(v, rng);
            double s = 0.0;
            for (double c : v) s += c;
            if (ev.contains(s)) ++h;
        }
        hits[w] = h;
    };
    if (counts.size() == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < counts.size(); ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    std::size_t total = 0;
    for (auto h : hits) total += h;
    double p = static_cast<double>(total) / static_cast<double>(samples);
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return {p, se, false};
}

// ---------------------------------------------------------------------------
// The two-term expansion of the L1 distance between the conditional law and
// the placed-coordinate mixture:
//   integral |f1 - f2| d mu^n  =  2 (1 - r)^+ * P[N = 1 | event]  +  2 * P[N = 0 | event]
// with r = P[S_n in x+Delta] / (n mu[x+Delta]) and N the number of
// coordinates in the window. Valid whenever r > 1/2.
// ---------------------------------------------------------------------------
struct TvReport {
    double term_ratio = 0.0;       // 2 (1-r)^+ q1
    double term_collective = 0.0;  // 2 q0
    double tv_l1 = 0.0;
    double tv_sup = 0.0;
    double se_ratio = 0.0;       // std error of term_ratio
    double se_collective = 0.0;  // std error of term_collective
    double shared_covariance = 0.0;  // cov(q1_hat, q0_hat), same conditional batch
    bool exact = false;
    double ratio = 0.0;  // r
    double q0 = 0.0, q1 = 0.0;
    double accept_rate = 1.0;
};

inline TvReport finish_tv_report(TvReport r) {
    r.term_ratio = 2.0 * std::max(0.0, 1.0 - r.ratio) * r.q1;
    r.term_collective = 2.0 * r.q0;
    r.tv_l1 = r.term_ratio + r.term_collective;
    r.tv_sup = 0.5 * r.tv_l1;
    return r;
}

// Exact route on a lattice carrier. All sum probabilities come from capped
// convolution tables, so the cost is O(n * x * support) even when x is far in
// the tail: for nonnegative coordinates, mass above the window can never fall
// back in, and P[S_n > x] = 1 - P[S_n <= x].
inline TvReport tv_decomposition_exact(const Pmf& p, std::size_t n, const ConditioningEvent& ev) {
    TvReport r;
    r.exact = true;
    double mbar = p.event_mass(ev);  // single-coordinate window mass
    if (!(mbar > 0.0)) throw ZeroMassEvent("tv_decomposition_exact: window has zero mass");
    if (n == 1) {
        r.ratio = 1.0;
        r.q0 = 0.0;
        r.q1 = 1.0;
        return finish_tv_report(r);
    }
    if (p.offset < 0) throw Error("tv_decomposition_exact: negative support not handled");
    const long cap = ev.finite() ? static_cast<long>(std::floor(ev.upper())) : static_cast<long>(std::floor(ev.x));
    CappedSumTables full(p, n, cap);
    double pn = ev.finite() ? full.window(n, ev.x, ev.upper()) : full.upper(n, ev.x);
    if (!(pn > 0.0)) throw ZeroMassEvent("tv_decomposition_exact: event has zero mass");
    r.ratio = pn / (static_cast<double>(n) * mbar);
    if (r.ratio <= 0.5)
        throw ValidityWindowViolated("tv_decomposition_exact: sum-tail ratio " + std::to_string(r.ratio) +
                                     " at or below 1/2");
    // coordinates outside the window are <= x on the event (positive support)
    Pmf low = p.restricted_leq(ev.x);
    CappedSumTables low_tabs(low, n, cap);
    // all n below x yet the sum inside the event
    double p_n0 = ev.finite() ? low_tabs.window(n, ev.x, ev.upper()) : low_tabs.upper(n, ev.x);
    r.q0 = p_n0 / pn;
    // exactly one coordinate in the window, the rest below x
    double p_n1 = 0.0;
    for (long w = p.offset; w <= p.max_point(); ++w) {
        double pw = p.at_point(w);
        double wv = static_cast<double>(w);
        if (pw > 0.0 && wv > ev.x && wv <= ev.upper()) {
            double rest = ev.finite() ? low_tabs.window(n - 1, ev.x - wv, ev.upper() - wv)
                                      : low_tabs.upper(n - 1, ev.x - wv);
            p_n1 += pw * rest;
        }
    }
    r.q1 = static_cast<double>(n) * p_n1 / pn;
    return finish_tv_report(r);
}

// Monte Carlo route. The conditional batch provides the window-count
// fractions; the placed-coordinate proposal provides the sum-tail ratio
// through E[1{S in event}/N], which stays O(1)-estimable however rare the
// event is. Both q0 and q1 come from the same batch; their covariance is
// reported.
inline TvReport tv_decomposition_mc(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                    const ConditionalSample& cond, std::size_t proposal_samples, std::uint64_t seed,
                                    unsigned workers = 1) {
    if (cond.vectors.empty()) throw EmptySample("tv_decomposition_mc: empty conditional batch");
    TvReport r;
    r.exact = false;
    r.accept_rate = cond.acceptance_rate;
    const double b = static_cast<double>(cond.vectors.size());
    std::size_t c0 = 0, c1 = 0;
    for (const auto& v : cond.vectors) {
        std::size_t nw = window_count(ev, v);
        if (nw == 0) ++c0;
        if (nw == 1) ++c1;
    }
    double q0 = static_cast<double>(c0) / b;
    double q1 = static_cast<double>(c1) / b;
    double se_q0 = std::sqrt(q0 * (1.0 - q0) / b);
    double se_q1 = std::sqrt(q1 * (1.0 - q1) / b);
    r.shared_covariance = -q0 * q1 / b;

    if (n == 1) {
        r.ratio = 1.0;
        r.q0 = q0;
        r.q1 = q1;
        return finish_tv_report(r);
    }

    auto prop = proposal_conditional(dist, n, ev, proposal_samples, derive_seed(seed, 0x70), workers);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& v : prop.vectors) {
        double s = 0.0;
        for (double c : v) s += c;
        double val = 0.0;
        if (ev.contains(s)) {
            std::size_t nw = window_count(ev, v);
            val = 1.0 / static_cast<double>(nw);  // nw >= 1 by construction
        }
        sum += val;
        sumsq += val * val;
    }
    const double m = static_cast<double>(prop.vectors.size());
    double e_star = sum / m;
    double var_e = std::max(0.0, (sumsq / m - e_star * e_star)) / m;
    double se_e = std::sqrt(var_e);
    double ratio = e_star / (1.0 - q0);
    if (!(ratio > 0.5))
        throw ValidityWindowViolated("tv_decomposition_mc: estimated sum-tail ratio " + std::to_string(ratio) +
                                     " at or below 1/2");
    double se_ratio_est =
        ratio * std::sqrt(var_e / (e_star * e_star) + (se_q0 * se_q0) / ((1.0 - q0) * (1.0 - q0)));

    r.ratio = ratio;
    r.q0 = q0;
    r.q1 = q1;
    r = finish_tv_report(r);
    double d_ratio = r.ratio < 1.0 ? 1.0 : 0.0;
    r.se_ratio = 2.0 * std::sqrt(std::pow(std::max(0.0, 1.0 - r.ratio) * se_q1, 2) +
                                 std::pow(r.q1 * se_ratio_est * d_ratio, 2));
    r.se_collective = 2.0 * se_q0;
    return r;
}

// Streaming flavor for fixed proposal budgets: the rejection pass keeps only
// the window-count tallies, never the vectors, so the memory cost does not
// depend on how likely the event is.
inline TvReport tv_decomposition_streaming(const Distribution& dist, std::size_t n, const ConditioningEvent& ev,
                                           std::uint64_t attempts, std::size_t proposal_samples, std::uint64_t seed,
                                           unsigned workers = 1) {
    if (workers == 0) workers = 1;
    std::vector<std::array<std::uint64_t, 3>> tallies(workers, {0, 0, 0});  // accepted, N==0, N==1
    std::uint64_t per_worker = attempts / workers;
    auto work = [&](std::size_t w) {
        RngStream rng(seed, w);
        std::vector<double> v(n);
        auto& t = tallies[w];
        for (std::uint64_t i = 0; i < per_worker; ++i) {
            dist.sample_into(v, rng);
            double s = 0.0;
            for (double c : v) s += c;
            if (!ev.contains(s)) continue;
            ++t[0];
            std::size_t nw = window_count(ev, v);
            if (nw == 0) ++t[1];
            if (nw == 1) ++t[2];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    std::uint64_t accepted = 0, c0 = 0, c1 = 0;
    for (auto& t : tallies) {
        accepted += t[0];
        c0 += t[1];
        c1 += t[2];
    }
    if (accepted == 0) throw EmptySample("tv_decomposition_streaming: no accepted draws in the budget");
    ConditionalSample counts_only;
    counts_only.kind = SamplerKind::Rejection;
    counts_only.n = n;
    counts_only.event = ev;
    counts_only.seed = seed;
    counts_only.attempts = per_worker * workers;
    counts_only.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(counts_only.attempts);
    // fabricate the count summary the batch API would have produced
    TvReport r;
    r.exact = false;
    r.accept_rate = counts_only.acceptance_rate;
    const double b = static_cast<double>(accepted);
    double q0 = static_cast<double>(c0) / b;
    double q1 = static_cast<double>(c1) / b;
    double se_q0 = std::sqrt(q0 * (1.0 - q0) / b);
    double se_q1 = std::sqrt(q1 * (1.0 - q1) / b);
    r.shared_covariance = -q0 * q1 / b;
    if (n == 1) {
        r.ratio = 1.0;
        r.q0 = q0;
        r.q1 = q1;
        return finish_tv_report(r);
    }
    auto prop = proposal_conditional(dist, n, ev, proposal_samples, derive_seed(seed, 0x70), workers);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& v : prop.vectors) {
        double s = 0.0;
        for (double c : v) s += c;
        double val = 0.0;
        if (ev.contains(s)) val = 1.0 / static_cast<double>(window_count(ev, v));
        sum += val;
        sumsq += val * val;
    }
    const double m = static_cast<double>(prop.vectors.size());
    double e_star = sum / m;
    double var_e = std::max(0.0, (sumsq / m - e_star * e_star)) / m;
    double ratio = e_star / (1.0 - q0);
    if (!(ratio > 0.5))
        throw ValidityWindowViolated("tv_decomposition_streaming: estimated sum-tail ratio " +
                                     std::to_string(ratio) + " at or below 1/2");
    double se_ratio_est =
        ratio * std::sqrt(var_e / (e_star * e_star) + (se_q0 * se_q0) / ((1.0 - q0) * (1.0 - q0)));
    r.ratio = ratio;
    r.q0 = q0;
    r.q1 = q1;
    r = finish_tv_report(r);
    double d_ratio = r.ratio < 1.0 ? 1.0 : 0.0;
    r.se_ratio = 2.0 * std::sqrt(std::pow(std::max(0.0, 1.0 - r.ratio) * se_q1, 2) +
                                 std::pow(r.q1 * se_ratio_est * d_ratio, 2));
    r.se_collective = 2.0 * se_q0;
    return r;
}

// ---------------------------------------------------------------------------
// sum-tail ratio scans: P[S_n in x+Delta] / (n mu[x+Delta]) over a grid
// ---------------------------------------------------------------------------
struct RatioRow {
    std::size_t n = 0;
    double x = 0.0;
    double prob_sum = 0.0;
    double n_times_tail = 0.0;
    double ratio = 0.0;
    double abs_err = 0.0;  // |ratio - 1|
    double stderr_ratio = 0.0;
    bool exact = false;
};

inline std::vector<RatioRow> ratio_scan_exact(const Pmf& p, const std::vector<std::size_t>& n_list,
                                              const std::vector<double>& x_grid, double delta_len) {
    std::vector<RatioRow> rows;
    double x_max = *std::max_element(x_grid.begin(), x_grid.end());
    bool finite = !std::isinf(delta_len);
    long cap = static_cast<long>(std::floor(finite ? x_max + delta_len : x_max));
    for (std::size_t n : n_list) {
        CappedSumTables tabs(p, n, cap);
        for (double x : x_grid) {
            ConditioningEvent ev(x, delta_len);
            RatioRow row;
            row.n = n;
            row.x = x;
            row.exact = true;
            row.prob_sum = finite ? tabs.window(n, x, ev.upper()) : tabs.upper(n, x);
            row.n_times_tail = static_cast<double>(n) * p.event_mass(ev);
            if (!(row.n_times_tail > 0.0)) throw ZeroMassEvent("ratio_scan_exact: window has zero mass");
            row.ratio = row.prob_sum / row.n_times_tail;
            row.abs_err = std::fabs(row.ratio - 1.0);
            rows.push_back(row);
        }
    }
    return rows;
}

inline std::vector<RatioRow> ratio_scan_mc(const Distribution& dist, const std::vector<std::size_t>& n_list,
                                           const std::vector<double>& x_grid, double delta_len, std::size_t samples,
                                           std::uint64_t seed, unsigned workers = 1) {
    std::vector<RatioRow> rows;
    std::uint64_t stream = 0;
    for (std::size_t n : n_list) {
        for (double x : x_grid) {
            ConditioningEvent ev(x, delta_len);
            auto est = sum_tail_mc(dist, n, ev, samples, derive_seed(seed, ++stream), workers);
            RatioRow row;
            row.n = n;
            row.x = x;
            row.exact = false;
            row.prob_sum = est.value;
            row.n_times_tail = static_cast<double>(n) * dist.interval_mass(x, delta_len);
            if (!(row.n_times_tail > 0.0)) throw ZeroMassEvent("ratio_scan_mc: window has zero mass");
            row.ratio = row.prob_sum / row.n_times_tail;
            row.abs_err = std::fabs(row.ratio - 1.0);
            row.stderr_ratio = est.std_error / row.n_times_tail;
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// After moving the maximum to the last slot, the remaining coordinates of a
// conditional batch should look like independent draws from the base law.
// ---------------------------------------------------------------------------
struct MarginalsReport {
    std::vector<double> ks_per_coord;  // n-1 one-sample KS values against the base CDF
    double max_abs_corr = 0.0;         // worst pairwise correlation among the rest
    double corr_std_error = 0.0;       // ~ 1/sqrt(batch)
    std::size_t batch = 0;
};

inline MarginalsReport smallest_marginals_check(const Distribution& dist, const ConditionalSample& cond) {
    if (cond.vectors.empty()) throw EmptySample("smallest_marginals_check: empty batch");
    std::size_t n = cond.n;
    if (n < 2) throw Error("smallest_marginals_check: needs n >= 2");
    const std::size_t b = cond.vectors.size();
    std::vector<std::vector<double>> coords(n - 1, std::vector<double>(b));
    for (std::size_t i = 0; i < b; ++i) {
        auto v = cond.vectors[i];
        swap_max_last_inplace(v);
        for (std::size_t k = 0; k + 1 < n; ++k) coords[k][i] = v[k];
    }
    MarginalsReport rep;
    rep.batch = b;
    for (std::size_t k = 0; k + 1 < n; ++k)
        rep.ks_per_coord.push_back(ks_one_sample(coords[k], [&](double t) { return dist.cdf(t); }));
    for (std::size_t a = 0; a + 1 < n; ++a)
        for (std::size_t c = a + 1; c + 1 < n; ++c)
            rep.max_abs_corr = std::max(rep.max_abs_corr, std::fabs(pearson_corr(coords[a], coords[c])));
    rep.corr_std_error = 1.0 / std::sqrt(static_cast<double>(b));
    return rep;
}

}  // namespace bigjump
