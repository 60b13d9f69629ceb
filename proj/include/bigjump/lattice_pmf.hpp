#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bigjump/conditioning.hpp"
#include "bigjump/coordinate_swap.hpp"
#include "bigjump/distribution.hpp"
#include "bigjump/errors.hpp"
#include "bigjump/rng.hpp"

namespace bigjump {

// Finite carrier for an integer-lattice law: mass[k] sits at offset + k.
// masses sum to 1; truncation_defect records how much of the ideal law was
// clipped before renormalising, so oracle error bars stay honest.
struct Pmf {
    long offset = 0;
    std::vector<double> masses;
    double truncation_defect = 0.0;

    long max_point() const { return offset + static_cast<long>(masses.size()) - 1; }

    double at_point(long p) const {
        long k = p - offset;
        if (k < 0 || k >= static_cast<long>(masses.size())) return 0.0;
        return masses[static_cast<std::size_t>(k)];
    }

    double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

    // mass of (a, b]
    double interval(double a, double b) const {
        double s = 0.0;
        for (std::size_t k = 0; k < masses.size(); ++k) {
            double v = static_cast<double>(offset + static_cast<long>(k));
            if (v > a && v <= b) s += masses[k];
        }
        return s;
    }

    double event_mass(const ConditioningEvent& ev) const { return interval(ev.x, ev.upper()); }

    double mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < masses.size(); ++k) m += masses[k] * static_cast<double>(offset + (long)k);
        return m;
    }

    // restriction to points <= cut (not renormalised)
    Pmf restricted_leq(double cut) const {
        Pmf r;
        r.offset = offset;
        r.truncation_defect = truncation_defect;
        for (std::size_t k = 0; k < masses.size(); ++k) {
            double v = static_cast<double>(offset + (long)k);
            r.masses.push_back(v <= cut ? masses[k] : 0.0);
        }
        return r;
    }

    static Pmf from_lattice(const Distribution& dist, long k_max) {
        if (dist.lattice_span() != 1.0) throw Error("Pmf: distribution is not a unit lattice");
        long lb = static_cast<long>(std::llround(dist.lower_bound()));
        Pmf p;
        p.offset = lb;
        p.truncation_defect = dist.tail(static_cast<double>(k_max));
        double run = 0.0;
        for (long k = lb; k <= k_max; ++k) {
            double m = dist.tail(static_cast<double>(k) - 0.5) - dist.tail(static_cast<double>(k) + 0.5);
            p.masses.push_back(m);
            run += m;
        }
        for (double& m : p.masses) m /= run;
        return p;
    }
};

// plain dense convolution
inline Pmf convolve(const Pmf& a, const Pmf& b, std::size_t support_cap = 1u << 22) {
    std::size_t len = a.masses.size() + b.masses.size() - 1;
    if (len > support_cap) throw SupportCapExceeded("convolve: result support " + std::to_string(len));
    Pmf r;
    r.offset = a.offset + b.offset;
    r.truncation_defect = a.truncation_defect + b.truncation_defect;
    r.masses.assign(len, 0.0);
    for (std::size_t i = 0; i < a.masses.size(); ++i) {
        double ai = a.masses[i];
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j < b.masses.size(); ++j) r.masses[i + j] += ai * b.masses[j];
    }
    return r;
}

// n-fold convolution; mass error grows at most linearly in n with the defect
inline Pmf convolve_n(const Pmf& p, std::size_t n, std::size_t support_cap = 1u << 22) {
    if (n < 1) throw Error("convolve_n: n must be >= 1");
    Pmf r = p;
    for (std::size_t m = 1; m < n; ++m) r = convolve(r, p, support_cap);
    r.truncation_defect = static_cast<double>(n) * p.truncation_defect;
    return r;
}

// ---------------------------------------------------------------------------
// Exact law of (X_1..X_n) on the event, by depth-first enumeration with
// prefix-sum pruning. Vectors are stored as packed lattice points (n <= 4).
// ---------------------------------------------------------------------------
struct ExactConditional {
    std::size_t n = 0;
    double event_mass = 0.0;                              // P[S_n in x + Delta]
    std::vector<std::pair<std::uint64_t, double>> atoms;  // packed vector -> conditional prob

    static std::uint64_t pack(const std::vector<long>& v) {
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < v.size(); ++i) key |= static_cast<std::uint64_t>(v[i] & 0xffff) << (16 * i);
        return key;
    }
    static std::vector<long> unpack(std::uint64_t key, std::size_t n) {
        std::vector<long> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<long>((key >> (16 * i)) & 0xffff);
        return v;
    }
};

inline ExactConditional exact_conditional_law(const Pmf& p, std::size_t n, const ConditioningEvent& ev,
                                              std::size_t budget = 80000000) {
    if (n < 1 || n > 4) throw EnumerationBudgetExceeded("exact_conditional_law: n outside enumeration budget");
    const long lo = p.offset;
    const long hi = p.max_point();
    ExactConditional out;
    out.n = n;
    std::vector<long> v(n);
    std::size_t visited = 0;
    double upper = ev.upper();

    auto rec = [&](auto&& self, std::size_t depth, long prefix, double prob) -> void {
        if (++visited > budget) throw EnumerationBudgetExceeded("exact_conditional_law: enumeration budget");
        std::size_t rem = n - depth;
        for (long val = lo; val <= hi; ++val) {
            double pv = p.at_point(val);
            if (pv == 0.0) continue;
            long s = prefix + val;
            double rest_min = static_cast<double>(s + static_cast<long>(rem - 1) * lo);
            double rest_max = static_cast<double>(s + static_cast<long>(rem - 1) * hi);
            if (rest_min > upper) break;          // values only grow from here
            if (rest_max <= ev.x) continue;       // cannot reach the event
            if (rem == 1) {
                if (ev.contains(static_cast<double>(s))) {
                    v[depth] = val;
                    out.event_mass += prob * pv;
                    out.atoms.emplace_back(ExactConditional::pack(v), prob * pv);
                }
            } else {
                v[depth] = val;
                self(self, depth + 1, s, prob * pv);
            }
        }
    };
    rec(rec, 0, 0, 1.0);
    if (out.event_mass <= 0.0) throw ZeroMassEvent("exact_conditional_law: event has zero mass");
    for (auto& a : out.atoms) a.second /= out.event_mass;
    return out;
}

// pushforward of the exact conditional law under swap_max_last
inline std::unordered_map<std::uint64_t, double> swap_pushforward(const ExactConditional& law) {
    std::unordered_map<std::uint64_t, double> out;
    for (const auto& [key, pr] : law.atoms) {
        auto v = ExactConditional::unpack(key, law.n);
        std::size_t mi = 0;
        for (std::size_t i = 1; i < law.n; ++i)
            if (v[i] > v[mi]) mi = i;
        std::swap(v[mi], v[law.n - 1]);
        out[ExactConditional::pack(v)] += pr;
    }
    return out;
}

// mu^{n-1} x nu_x^Delta enumerated over the same packed keys
inline std::unordered_map<std::uint64_t, double> product_with_window(const Pmf& p, std::size_t n,
                                                                     const ConditioningEvent& ev) {
    const long lo = p.offset;
    const long hi = p.max_point();
    std::vector<long> window;
    double mbar = 0.0;
    for (long w = lo; w <= hi; ++w) {
        double pw = p.at_point(w);
        if (pw > 0.0 && static_cast<double>(w) > ev.x && static_cast<double>(w) <= ev.upper()) {
            window.push_back(w);
            mbar += pw;
        }
    }
    if (mbar <= 0.0) throw ZeroMassEvent("product_with_window: window has zero mass");
    std::unordered_map<std::uint64_t, double> out;
    std::vector<long> v(n);
    auto rec = [&](auto&& self, std::size_t depth, double prob) -> void {
        if (depth == n - 1) {
            for (long w : window) {
                v[depth] = w;
                out[ExactConditional::pack(v)] += prob * p.at_point(w) / mbar;
            }
            return;
        }
        for (long val = lo; val <= hi; ++val) {
            double pv = p.at_point(val);
            if (pv == 0.0) continue;
            v[depth] = val;
            self(self, depth + 1, prob * pv);
        }
    };
    rec(rec, 0, 1.0);
    return out;
}

struct TvPair {
    double tv_sup = 0.0;  // sup over sets
    double tv_l1 = 0.0;   // integral of |density difference|, twice tv_sup
};

// ---------------------------------------------------------------------------
// CDF tables of the partial sums S_1..S_n with support capped at `cap`; sums
// beyond the cap are dropped (they cannot re-enter an interval below it when
// coordinates are nonnegative), so queries at or below the cap are exact and
// the build stays O(n * cap * support) however deep the threshold.
// ---------------------------------------------------------------------------
class CappedSumTables {
  public:
    CappedSumTables(const Pmf& single, std::size_t n, long cap) : single_(single), cap_(cap) {
        if (single.offset < 0) throw Error("CappedSumTables: negative support not handled");
        std::vector<double> cur = single.masses;
        long cur_off = single.offset;
        double single_total = single.total();
        double dropped = 0.0;  // mass pushed past the cap, carried exactly
        {
            long keep = cap_ - cur_off + 1;
            if (keep < 0) keep = 0;
            for (std::size_t k = static_cast<std::size_t>(keep); k < cur.size(); ++k) dropped += cur[k];
            if (static_cast<long>(cur.size()) > keep) cur.resize(static_cast<std::size_t>(keep));
        }
        store(cur, cur_off, dropped);
        for (std::size_t m = 2; m <= n; ++m) {
            long new_off = cur_off + single.offset;
            std::size_t new_len = static_cast<std::size_t>(std::max<long>(0, cap_ - new_off + 1));
            std::vector<double> nxt(new_len, 0.0);
            double overflow = 0.0;
            for (std::size_t i = 0; i < cur.size(); ++i) {
                double ci = cur[i];
                if (ci == 0.0) continue;
                long si = cur_off + static_cast<long>(i);
                for (std::size_t j = 0; j < single.masses.size(); ++j) {
                    double pj = single.masses[j];
                    if (pj == 0.0) continue;
                    long s = si + single.offset + static_cast<long>(j);
                    if (s > cap_)
                        overflow += ci * pj;
                    else
                        nxt[static_cast<std::size_t>(s - new_off)] += ci * pj;
                }
            }
            dropped = dropped * single_total + overflow;
            cur = std::move(nxt);
            cur_off = new_off;
            store(cur, cur_off, dropped);
        }
    }

    long cap() const { return cap_; }

    // P[S_m <= t] for t <= cap (exact; mass above the cap was never counted)
    double cdf(std::size_t m, double t) const {
        const auto& c = cdfs_.at(m - 1);
        long idx = static_cast<long>(std::floor(t)) - offsets_[m - 1];
        if (idx < 0) return 0.0;
        if (idx >= static_cast<long>(c.size())) idx = static_cast<long>(c.size()) - 1;
        return c[static_cast<std::size_t>(idx)];
    }

    // P[S_m > t]: summed top-down so deep tails keep full relative precision
    double upper(std::size_t m, double t) const {
        const auto& u = utails_.at(m - 1);
        if (u.empty()) return dropped_.at(m - 1);
        long idx = static_cast<long>(std::floor(t)) - offsets_[m - 1] + 1;
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long>(u.size())) return dropped_.at(m - 1);
        return u[static_cast<std::size_t>(idx)] + dropped_.at(m - 1);
    }

    // P[S_m in (a, b]], difference of upper tails (no 1-x cancellation)
    double window(std::size_t m, double a, double b) const { return upper(m, a) - upper(m, b); }

  private:
    void store(const std::vector<double>& masses, long off, double dropped) {
        std::vector<double> cdf(masses.size()), ut(masses.size() + 1, 0.0);
        double run = 0.0;
        for (std::size_t k = 0; k < masses.size(); ++k) {
            run += masses[k];
            cdf[k] = run;
        }
        for (std::size_t k = masses.size(); k-- > 0;) ut[k] = ut[k + 1] + masses[k];
        cdfs_.push_back(std::move(cdf));
        utails_.push_back(std::move(ut));
        offsets_.push_back(off);
        dropped_.push_back(dropped);
    }

    Pmf single_;
    long cap_;
    std::vector<std::vector<double>> cdfs_;
    std::vector<std::vector<double>> utails_;  // utails_[m-1][k] = P[S_m >= offset+k] - dropped
    std::vector<double> dropped_;
    std::vector<long> offsets_;
};

// TV between the swapped conditional law and the product form, both enumerated
inline TvPair exact_tv(const Pmf& p, std::size_t n, const ConditioningEvent& ev, std::size_t budget = 80000000) {
    auto law = exact_conditional_law(p, n, ev, budget);
    auto push = swap_pushforward(law);
    auto prod = product_with_window(p, n, ev);
    double l1 = 0.0;
    for (const auto& [key, pr] : push) {
        auto it = prod.find(key);
        l1 += std::fabs(pr - (it == prod.end() ? 0.0 : it->second));
    }
    for (const auto& [key, pr] : prod)
        if (push.find(key) == push.end()) l1 += pr;
    return {l1 / 2.0, l1};
}

// ---------------------------------------------------------------------------
// Exact conditional sampling for lattice laws at any scale: tables of the
// partial-sum laws capped just above the event window, then sequential
// inverse-transform of each coordinate given the running remainder.
// ---------------------------------------------------------------------------
class LatticeConditionalSampler {
  public:
    LatticeConditionalSampler(Pmf single, std::size_t n, const ConditioningEvent& ev)
        : single_(std::move(single)), n_(n), ev_(ev) {
        if (n_ < 1) throw Error("LatticeConditionalSampler: n must be >= 1");
        if (ev.finite()) {
            cap_ = static_cast<long>(std::floor(ev.upper()));
        } else {
            // nothing above the full support sum matters
            double full = static_cast<double>(n_) * static_cast<double>(single_.max_point());
            if (full > double(1l << 26)) throw SupportCapExceeded("LatticeConditionalSampler: open window too wide");
            cap_ = static_cast<long>(full);
        }
        if (static_cast<double>(n_) * static_cast<double>(single_.max_point()) <= ev.x)
            throw ZeroMassEvent("LatticeConditionalSampler: support cannot reach the event");
        if (n_ >= 2) tables_.emplace(single_, n_ - 1, cap_);
        event_prob_ = n_ == 1 ? window_mass_single(ev_.x, ev_.upper()) : window_mass_mixed(n_ - 1, ev_.x, ev_.upper());
        if (event_prob_ <= 0.0) throw ZeroMassEvent("LatticeConditionalSampler: event has zero mass");
    }

    double event_probability() const { return event_prob_; }

    std::vector<double> draw(RngStream& rng) const {
        std::vector<double> out(n_);
        long prefix = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t rem = n_ - i - 1;  // coordinates after this one
            double lo_target = ev_.x - static_cast<double>(prefix);
            double hi_target = ev_.upper() - static_cast<double>(prefix);
            double tot = rem == 0 ? window_mass_single(lo_target, hi_target)
                                  : window_mass_mixed(rem, lo_target, hi_target);
            if (!(tot > 0.0)) throw Error("LatticeConditionalSampler: dead branch reached");
            double u = rng.unit_open() * tot;
            long chosen = single_.offset;
            bool have = false;
            double acc = 0.0;
            for (long val = single_.offset; val <= single_.max_point(); ++val) {
                double pv = single_.at_point(val);
                if (pv == 0.0) continue;
                double w;
                if (rem == 0) {
                    w = (static_cast<double>(val) > lo_target && static_cast<double>(val) <= hi_target) ? pv : 0.0;
                } else {
                    w = pv * table_window(rem, lo_target - static_cast<double>(val),
                                          hi_target - static_cast<double>(val));
                }
                if (w > 0.0) {
                    chosen = val;
                    have = true;
                }
                acc += w;
                if (acc >= u && w > 0.0) break;
            }
            if (!have) throw Error("LatticeConditionalSampler: no admissible coordinate");
            out[i] = static_cast<double>(chosen);
            prefix += chosen;
        }
        return out;
    }

  private:
    // P[S_rem in (a, b]] from the capped tables
    double table_window(std::size_t rem, double a, double b) const {
        return tables_->window(rem, a, std::min(b, static_cast<double>(cap_)));
    }

    double window_mass_single(double a, double b) const {
        double s = 0.0;
        for (long val = single_.offset; val <= single_.max_point(); ++val) {
            double v = static_cast<double>(val);
            if (v > a && v <= b) s += single_.at_point(val);
        }
        return s;
    }

    double window_mass_mixed(std::size_t rem, double a, double b) const {
        double s = 0.0;
        for (long val = single_.offset; val <= single_.max_point(); ++val) {
            double pv = single_.at_point(val);
            if (pv == 0.0) continue;
            s += pv * table_window(rem, a - static_cast<double>(val), b - static_cast<double>(val));
        }
        return s;
    }

    Pmf single_;
    std::size_t n_;
    ConditioningEvent ev_;
    long cap_ = 0;
    double event_prob_ = 0.0;
    std::optional<CappedSumTables> tables_;  // partial sums S_1..S_{n-1}
};

}  // namespace bigjump
