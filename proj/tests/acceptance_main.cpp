// Acceptance suite: one criterion per invocation (argv[1] in 1..10), one
// [PASS]/[FAIL] line per check. Exit code 0 only if the criterion holds as
// specified. Where a specified scale sits outside the asymptotic regime for
// positive-mean families, the honest failing measurement is reported and a
// deep-scale demonstration of the same limit statement follows.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <cstdarg>
#include <string>
#include <vector>

#include "bigjump/experiment.hpp"

using namespace bigjump;

namespace {

bool g_all = true;

void report(bool ok, const char* tag, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", tag, detail.c_str());
    if (!ok) g_all = false;
}

void info(const std::string& s) { std::printf("       %s\n", s.c_str()); }

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<double> maxima(const ConditionalSample& cs) {
    std::vector<double> m;
    m.reserve(cs.vectors.size());
    for (const auto& v : cs.vectors) m.push_back(*std::max_element(v.begin(), v.end()));
    return m;
}

std::string cert_note(const ConditionalSample& cs) {
    if (cs.coverage_defect_ratio < 1e-2) return fmt("certified missing mass <= %.1e", cs.coverage_defect_ratio);
    return "certificate inconclusive at this depth; sampler cross-validated against exact references";
}

std::vector<double> scaled_fluct(const ConditionalSample& cs, double centering, double scale) {
    std::vector<double> out;
    out.reserve(cs.vectors.size());
    for (const auto& v : cs.vectors)
        out.push_back((*std::max_element(v.begin(), v.end()) - cs.event.x + centering) / scale);
    return out;
}

// ---------------------------------------------------------------------------
// 1. enumeration TV against the two-term expansion, zeta(3) truncated at 60
// ---------------------------------------------------------------------------
void criterion1() {
    Zeta z(3.0);
    Pmf p = Pmf::from_lattice(z, 60);
    int checked = 0;
    for (double x : {20.0, 30.0, 40.0}) {
        for (double len : {5.0, kInf}) {
            ConditioningEvent ev(x, len);
            auto dec = tv_decomposition_exact(p, 3, ev);
            if (dec.ratio <= 0.5 || dec.ratio >= 1.5) {
                info(fmt("x=%g delta=%s skipped: ratio %.4f outside (1/2, 3/2)", x, ev.finite() ? "5" : "inf",
                         dec.ratio));
                continue;
            }
            auto oracle = exact_tv(p, 3, ev);
            double diff = std::fabs(dec.tv_l1 - oracle.tv_l1);
            ++checked;
            report(diff < 1e-8, "C1 oracle TV identity",
                   fmt("x=%g delta=%s: |enumeration - expansion| = %.3e (tv_l1=%.6f, ratio=%.4f)", x,
                       ev.finite() ? "5" : "inf", diff, oracle.tv_l1, dec.ratio));
        }
    }
    report(checked >= 4, "C1 coverage", fmt("%d of 6 points inside the validity window", checked));
}

// ---------------------------------------------------------------------------
// 2. tv_sup trend on x = c * d_n, pareto(3)
// ---------------------------------------------------------------------------
void criterion2() {
    auto p3 = make_distribution("pareto:alpha=3");
    for (std::size_t n : {10u, 50u}) {
        double dn = d_n(*p3, n);
        std::vector<double> tv, se;
        for (double c : {2.0, 5.0, 10.0}) {
            ConditioningEvent ev(c * dn, kInf);
            auto rep = tv_decomposition_streaming(*p3, n, ev, 2000000, 100000, 900 + n + int(c), 2);
            double s = std::sqrt(rep.se_ratio * rep.se_ratio + rep.se_collective * rep.se_collective) / 2.0;
            tv.push_back(rep.tv_sup);
            se.push_back(s);
            info(fmt("n=%zu c=%g x=%.2f: tv_sup=%.4f +/- %.4f (q0=%.4f, ratio=%.3f, accept=%.2e)", n, c, c * dn,
                     rep.tv_sup, s, rep.q0, rep.ratio, rep.accept_rate));
        }
        bool mono = true;
        for (int i = 0; i + 1 < 3; ++i) {
            double gap = tv[i + 1] - tv[i];
            double band = 3.0 * std::sqrt(se[i] * se[i] + se[i + 1] * se[i + 1]);
            if (gap > band) mono = false;
        }
        report(mono, "C2 trend", fmt("n=%zu: tv_sup nonincreasing in c within 3 sigma", n));
        report(tv[2] < 0.1, "C2 threshold (as specified)",
               fmt("n=%zu: tv_sup=%.4f at c=10 vs 0.1; x=10*d_n=%.1f sits below the bulk n*mean=%.0f scale,"
                   " where the single-jump expansion cannot be small",
                   n, tv[2], 10.0 * dn, double(n) * 1.5));
    }
    // deep-scale demonstration: same statistic, thresholds beyond the bulk,
    // every ingredient exact on the zeta lattice
    auto z = make_distribution("zeta:alpha=3");
    std::size_t n = 50;
    double x10 = bulk_clearance(*z, n, 0.07);
    Pmf p = Pmf::from_lattice(*z, static_cast<long>(4.0 * x10));
    std::vector<double> tvs;
    for (double c : {2.0, 5.0, 10.0}) {
        auto rep = tv_decomposition_exact(p, n, ConditioningEvent(c / 10.0 * x10, kInf));
        tvs.push_back(rep.tv_sup);
        info(fmt("deep zeta n=50 x=%.0f: tv_sup=%.4f exact (q0=%.4f, ratio=%.3f)", c / 10.0 * x10, rep.tv_sup,
                 rep.q0, rep.ratio));
    }
    report(tvs[0] > tvs[1] && tvs[1] > tvs[2] && tvs[2] < 0.1, "C2 deep-scale demonstration",
           fmt("zeta n=50, x up to %.0f: exact tv_sup decreasing to %.4f < 0.1", x10, tvs[2]));
}

// ---------------------------------------------------------------------------
// 3. two-fold sum-tail ratio, zeta(3), exact
// ---------------------------------------------------------------------------
void criterion3() {
    Zeta z(3.0);
    Pmf p = Pmf::from_lattice(z, 4000);
    auto rows = ratio_scan_exact(p, {2}, {50.0, 100.0, 200.0}, kInf);
    for (auto& r : rows) info(fmt("x=%g: |ratio-1| = %.6f", r.x, r.abs_err));
    report(rows[0].abs_err > rows[1].abs_err && rows[1].abs_err > rows[2].abs_err, "C3 strictly decreasing",
           fmt("%.4f > %.4f > %.4f", rows[0].abs_err, rows[1].abs_err, rows[2].abs_err));
    report(rows[2].abs_err < 0.1, "C3 threshold", fmt("|ratio-1| = %.4f < 0.1 at x=200", rows[2].abs_err));
}

// ---------------------------------------------------------------------------
// 4. residual law of the max, pareto(3), open window
// ---------------------------------------------------------------------------
void criterion4() {
    auto p3 = make_distribution("pareto:alpha=3");
    std::size_t n = 100;
    double x = 10.0 * d_n(*p3, n);
    ConditioningEvent ev(x, kInf);
    auto cdf = residual_limit_cdf(*p3);

    auto cond = rejection_fixed_attempts(*p3, n, ev, 430000000ULL, 41, 2);
    info(fmt("stated scale x=%.2f: %zu draws from %.2e proposals (accept %.2e)", x, cond.vectors.size(),
             double(cond.attempts), cond.acceptance_rate));
    std::size_t use = std::min<std::size_t>(cond.vectors.size(), 20000);
    cond.vectors.resize(use);
    auto fl = scaled_fluct(cond, 0.0, x);
    double ks = ks_one_sample(fl, cdf);
    std::size_t neg = std::count_if(fl.begin(), fl.end(), [](double v) { return v <= 0.0; });
    report(ks < 0.05, "C4 residual law (as specified)",
           fmt("KS=%.4f vs 0.05 at %zu draws; %.1f%% of conditional maxima sit at or below x because"
               " x=10*d_n=%.0f is inside the bulk-assisted region (n*mean=%.0f)",
               ks, use, 100.0 * double(neg) / double(use), x, double(n) * 1.5));

    double deep_x = bulk_clearance(*p3, n, 0.0135);
    ConditioningEvent evd(deep_x, kInf);
    auto planted = planted_conditional(*p3, n, evd, suggest_jump_floor(*p3, n, evd), 20000, 42, 2);
    auto fld = scaled_fluct(planted, 0.0, deep_x);
    double ksd = ks_one_sample(fld, cdf);
    report(ksd < 0.05, "C4 deep-scale demonstration",
           fmt("x=%.0f: KS=%.4f < 0.05 at %zu draws (accept %.3f, %s)", deep_x, ksd, fld.size(),
               planted.acceptance_rate, cert_note(planted).c_str()));
}

// ---------------------------------------------------------------------------
// 5. gumbel residual for weibull(0.4), grid chosen by us per the criterion
// ---------------------------------------------------------------------------
void criterion5() {
    auto wb = make_distribution("weibull:shape=0.4");
    std::size_t n = 50;
    for (double x : {6e5, 1.2e6}) {
        ConditioningEvent ev(x, kInf);
        double psi = residual_scale_psi(*wb, x);
        auto planted = planted_conditional(*wb, n, ev, suggest_jump_floor(*wb, n, ev), 20000, 51, 2);
        auto fl = scaled_fluct(planted, 0.0, psi);
        double ks = ks_one_sample(fl, [](double u) { return u <= 0.0 ? 0.0 : 1.0 - std::exp(-u); });
        report(ks < 0.05, "C5 gumbel residual",
               fmt("x=%.0f psi=%.0f: KS=%.4f < 0.05 at 2e4 draws (sampler accept=%.3f >= 1e-4, %s)", x, psi, ks,
                   planted.acceptance_rate, cert_note(planted).c_str()));
    }
    // the sampler used above against plain rejection where rejection is feasible
    ConditioningEvent evv(776.0, kInf);
    auto naive = rejection_fixed_attempts(*wb, n, evv, 40000000ULL, 52, 2);
    auto planted = planted_conditional(*wb, n, evv, suggest_jump_floor(*wb, n, evv), naive.vectors.size(), 53, 2);
    double ksv = ks_two_sample(maxima(naive), maxima(planted));
    report(ksv < ks_critical_two(0.001, naive.vectors.size(), planted.vectors.size()), "C5 sampler validation",
           fmt("planted vs plain rejection at x=776: max-law two-sample KS=%.4f (%zu draws each)", ksv,
               naive.vectors.size()));
}

// ---------------------------------------------------------------------------
// 6. narrow window: max rides the remaining sum, pareto(3)
// ---------------------------------------------------------------------------
void criterion6() {
    auto p3 = make_distribution("pareto:alpha=3");
    std::size_t n = 100;
    double x = 10.0 * d_n(*p3, n);
    ConditioningEvent ev(x, 1.0);

    auto make_reference = [&](std::size_t count, std::uint64_t seed, double s) {
        RngStream rng(seed);
        std::vector<double> ref(count), buf(n - 1);
        for (auto& r : ref) {
            p3->sample_into(buf, rng);
            double sum = 0.0;
            for (double c : buf) sum += c;
            r = -sum + rng.unit_open() * s;
        }
        return ref;
    };

    auto cond = rejection_fixed_attempts(*p3, n, ev, 900000000ULL, 61, 2);
    info(fmt("stated scale x=%.2f delta=(0,1]: %zu draws from %.2e proposals (stated 1e4 draws;"
             " the full count costs ~6e12 proposals at accept %.2e)",
             x, cond.vectors.size(), double(cond.attempts), cond.acceptance_rate));
    if (cond.vectors.empty()) {
        report(false, "C6 stable window (as specified)", "no draws inside the budget");
    } else {
        auto fl = scaled_fluct(cond, 0.0, 1.0);
        double ks = ks_two_sample(fl, make_reference(10000, 62, 1.0));
        report(ks < 0.05, "C6 stable window (as specified)",
               fmt("two-sample KS=%.4f vs 0.05 (%zu vs 1e4 draws); the conditional tilt of S_99 at x=%.0f"
                   " shifts the rest-sum by ~4*Var(S_99)/(x-n*mean) = %.2f",
                   ks, fl.size(), x, 4.0 * 0.75 * 99.0 / (x - 150.0)));
    }

    double deep_x = 1200.0;
    ConditioningEvent evd(deep_x, 1.0);
    auto planted = planted_conditional(*p3, n, evd, suggest_jump_floor(*p3, n, evd), 10000, 63, 2);
    auto fld = scaled_fluct(planted, 0.0, 1.0);
    double ksd = ks_two_sample(fld, make_reference(10000, 64, 1.0));
    report(ksd < 0.05, "C6 deep-scale demonstration",
           fmt("x=%.0f: two-sample KS=%.4f < 0.05 at 1e4 draws each (accept %.2e, %s)", deep_x, ksd,
               planted.acceptance_rate, cert_note(planted).c_str()));
}

// ---------------------------------------------------------------------------
// 7. intermediate window: uniform overshoot location
// ---------------------------------------------------------------------------
void criterion7() {
    auto p3 = make_distribution("pareto:alpha=3");
    std::size_t n = 100;
    double x = 1e6, len = 25000.0;
    ConditioningEvent ev(x, len);
    auto call = classify_regime(*p3, n, ev, 10.0);
    report(call.regime == Regime::Uniform, "C7 classification",
           fmt("x=%.0f |Delta|=%.0f with rho=10 -> %s (b_n*rho=%.1f <= |Delta| <= psi/rho=%.0f)", x, len,
               to_string(call.regime), 10.0 * sum_normalization(*p3, n).b_n, residual_scale_psi(*p3, x) / 10.0));
    auto planted = planted_conditional(*p3, n, ev, suggest_jump_floor(*p3, n, ev), 10000, 71, 2);
    auto fl = scaled_fluct(planted, 0.0, len);
    double ks = ks_one_sample(fl, [](double u) { return std::clamp(u, 0.0, 1.0); });
    report(ks < 0.05, "C7 uniform overshoot",
           fmt("KS=%.4f < 0.05 at 1e4 draws (accept %.3f, %s)", ks, planted.acceptance_rate,
               cert_note(planted).c_str()));
}

// ---------------------------------------------------------------------------
// 8. critical window |Delta| = 5 b_n: aU minus the centered scaled sum
// ---------------------------------------------------------------------------
void criterion8() {
    auto p3 = make_distribution("pareto:alpha=3");
    std::size_t n = 100;
    auto norm = sum_normalization(*p3, n);
    double a = 5.0, len = a * norm.b_n;
    double x = 44550.0;
    ConditioningEvent ev(x, len);
    auto planted = planted_conditional(*p3, n, ev, suggest_jump_floor(*p3, n, ev), 10000, 81, 2);
    auto fl = scaled_fluct(planted, norm.centering, norm.b_n);
    RngStream rng(82);
    std::vector<double> ref(10000), buf(n - 1);
    for (auto& r : ref) {
        p3->sample_into(buf, rng);
        double sum = 0.0;
        for (double c : buf) sum += c;
        r = a * rng.unit_open() - (sum - norm.centering) / norm.b_n;
    }
    double ks = ks_two_sample(fl, ref);
    report(ks < 0.05, "C8 critical stable window",
           fmt("x=%.0f |Delta|=5*b_n=%.2f: two-sample KS=%.4f < 0.05 at 1e4 draws each (accept %.2e, %s)", x, len,
               ks, planted.acceptance_rate, cert_note(planted).c_str()));
}

// ---------------------------------------------------------------------------
// 9. the redistributed-block law breaks the uniform limit
// ---------------------------------------------------------------------------
void criterion9() {
    Counterexample ce({3.0, 0.5, 1.0});
    for (std::size_t k : {10u, 20u}) {
        double gap = counterexample_mass_ratio(ce, k, 0.5, 1.0);
        double filled = counterexample_mass_ratio(ce, k, 0.0, 0.5);
        report(gap == 0.0 && gap != 0.5, "C9 counterexample",
               fmt("k=%zu x=d_k=%.0f Delta=(0,c_k=%.0f]: mass ratio on [eps,1) = %g, exactly 0 and not 1-eps=0.5"
                   " (complement carries %.6f)",
                   k, ce.block_start(k), ce.block_interval(k), gap, filled));
    }
}

// ---------------------------------------------------------------------------
// 10. the two samplers agree on the max law and its position
// ---------------------------------------------------------------------------
void criterion10() {
    auto p3 = make_distribution("pareto:alpha=3");
    std::size_t n = 20;
    double x = 10.0 * d_n(*p3, n);
    ConditioningEvent ev(x, kInf);

    auto cond = rejection_fixed_attempts(*p3, n, ev, 220000000ULL, 105, 2);
    std::size_t use = std::min<std::size_t>(cond.vectors.size(), 10000);
    cond.vectors.resize(use);
    info(fmt("stated scale x=%.2f: %zu rejection draws (accept %.2e)", x, use, cond.acceptance_rate));
    auto prop = proposal_conditional(*p3, n, ev, 10000, 106, 2);
    double ks = ks_two_sample(maxima(cond), maxima(prop));
    std::size_t below = 0;
    for (const auto& v : cond.vectors) below += *std::max_element(v.begin(), v.end()) <= x;
    report(ks < 0.05, "C10a max law (as specified)",
           fmt("two-sample KS=%.4f vs 0.05; %.0f%% of exact conditional maxima are below x at x=10*d_n=%.1f,"
               " while every placed-coordinate max exceeds it",
               ks, 100.0 * double(below) / double(use), x));
    std::vector<std::size_t> pos(n, 0);
    for (const auto& v : cond.vectors) ++pos[argmax_first(v)];
    double pval = chi_square_uniform_pvalue(pos);
    report(pval > 0.001, "C10b max position uniform (as specified)",
           fmt("chi-square p=%.4f > 0.001 over %zu positions at %zu draws", pval, n, use));

    double deep_x = 6000.0;
    ConditioningEvent evd(deep_x, kInf);
    auto planted = planted_conditional(*p3, n, evd, suggest_jump_floor(*p3, n, evd), 10000, 107, 2);
    auto propd = proposal_conditional(*p3, n, evd, 10000, 108, 2);
    double ksd = ks_two_sample(maxima(planted), maxima(propd));
    std::vector<std::size_t> posd(n, 0);
    for (const auto& v : planted.vectors) ++posd[argmax_first(v)];
    double pvald = chi_square_uniform_pvalue(posd);
    report(ksd < 0.05 && pvald > 0.001, "C10 deep-scale demonstration",
           fmt("x=%.0f: max-law KS=%.4f < 0.05, position chi-square p=%.4f > 0.001 (accept %.3f)", deep_x, ksd,
               pvald, planted.acceptance_rate));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
        return 2;
    }
    int c = std::atoi(argv[1]);
    switch (c) {
        case 1: criterion1(); break;
        case 2: criterion2(); break;
        case 3: criterion3(); break;
        case 4: criterion4(); break;
        case 5: criterion5(); break;
        case 6: criterion6(); break;
        case 7: criterion7(); break;
        case 8: criterion8(); break;
        case 9: criterion9(); break;
        case 10: criterion10(); break;
        default: std::fprintf(stderr, "unknown criterion %d\n", c); return 2;
    }
    return g_all ? 0 : 1;
}
