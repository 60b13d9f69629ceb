#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bigjump/errors.hpp"
#include "bigjump/rng.hpp"
#include "bigjump/special.hpp"

namespace bigjump {

enum class MdaClass { Gumbel, Frechet, None };

// Sum-domain of attraction. index == 2 with gaussian == true means the
// ordinary CLT applies (finite variance).
struct StableAttraction {
    double index = 2.0;
    bool gaussian = true;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// fast u^{-1/3}: exponent-hack seed plus five Newton steps, full double precision
inline double inv_cbrt(double u) {
    std::uint64_t i = std::bit_cast<std::uint64_t>(u);
    i = 0x5540000000000000ULL - i / 3;
    double y = std::bit_cast<double>(i);
    for (int k = 0; k < 5; ++k) y = y * (4.0 - u * y * y * y) * (1.0 / 3.0);
    return y;
}

// A heavy-tailed law from the catalogue. Immutable after construction; all
// methods are const and safe to call concurrently.
class Distribution {
  public:
    virtual ~Distribution() = default;

    // P[X > x]; total on the reals (returns 1 below the support).
    virtual double tail(double x) const = 0;

    // inf{ y : tail(y) <= t } for t in (0,1]; the right-continuous inverse in
    // tail space. Working in tail space keeps full relative precision for
    // deep-tail conditioning.
    virtual double quantile_from_tail(double t) const = 0;

    virtual double lower_bound() const = 0;
    virtual double lattice_span() const { return 0.0; }
    virtual MdaClass mda_class() const = 0;
    virtual std::optional<StableAttraction> stable_attraction() const = 0;
    // regular-variation index of the tail, when there is one
    virtual std::optional<double> tail_index() const { return std::nullopt; }
    virtual std::optional<double> mean() const = 0;
    virtual std::optional<double> variance() const = 0;
    virtual std::string spec_string() const = 0;

    bool is_lattice() const { return lattice_span() > 0.0; }
    double cdf(double x) const { return 1.0 - tail(x); }

    // mass of (x, x+delta_len]
    double interval_mass(double x, double delta_len) const {
        if (!(delta_len > 0.0)) throw Error("interval_mass: delta_len must be positive");
        if (is_lattice() && !std::isinf(delta_len) && delta_len < lattice_span())
            throw DeltaBelowSpan(spec_string() + ": delta " + std::to_string(delta_len) +
                                 " below lattice span " + std::to_string(lattice_span()));
        if (std::isinf(delta_len)) return tail(x);
        return tail(x) - tail(x + delta_len);
    }

    // inf{ x : F(x) >= p } for p in (0,1]
    double quantile(double p) const {
        if (!(p > 0.0) || p > 1.0) throw Error("quantile: p outside (0,1]");
        if (p == 1.0) throw NoFiniteQuantile(spec_string() + ": p=1 with unbounded support");
        return quantile_from_tail(1.0 - p);
    }

    double sample(RngStream& rng) const { return quantile_from_tail(rng.unit_open()); }

    virtual void sample_into(std::span<double> out, RngStream& rng) const {
        for (double& v : out) v = quantile_from_tail(rng.unit_open());
    }
};

using DistPtr = std::shared_ptr<const Distribution>;

// ---------------------------------------------------------------------------
// Pareto: density alpha * xm^alpha / x^(alpha+1) on [xm, inf)
// ---------------------------------------------------------------------------
class Pareto final : public Distribution {
  public:
    explicit Pareto(double alpha, double xm = 1.0) : alpha_(alpha), xm_(xm) {
        if (!(alpha > 0.0)) throw ConfigError("pareto: alpha must be > 0");
        if (!(xm > 0.0)) throw ConfigError("pareto: lower must be > 0");
    }

    double tail(double x) const override {
        if (x <= xm_) return 1.0;
        return std::pow(x / xm_, -alpha_);
    }
    double quantile_from_tail(double t) const override { return xm_ * std::pow(t, -1.0 / alpha_); }
    double lower_bound() const override { return xm_; }
    MdaClass mda_class() const override { return MdaClass::Frechet; }
    std::optional<StableAttraction> stable_attraction() const override {
        if (alpha_ > 2.0) return StableAttraction{2.0, true};
        return StableAttraction{alpha_, false};
    }
    std::optional<double> tail_index() const override { return alpha_; }
    std::optional<double> mean() const override {
        if (alpha_ <= 1.0) return std::nullopt;
        return alpha_ * xm_ / (alpha_ - 1.0);
    }
    std::optional<double> variance() const override {
        if (alpha_ <= 2.0) return std::nullopt;
        return xm_ * xm_ * alpha_ / ((alpha_ - 1.0) * (alpha_ - 1.0) * (alpha_ - 2.0));
    }
    std::string spec_string() const override {
        std::ostringstream os;
        os << "pareto:alpha=" << alpha_;
        if (xm_ != 1.0) os << ",lower=" << xm_;
        return os.str();
    }

    void sample_into(std::span<double> out, RngStream& rng) const override {
        if (alpha_ == 3.0) {
            // four interleaved Newton chains keep the pipeline busy
            std::size_t i = 0;
            for (; i + 4 <= out.size(); i += 4) {
                double u0 = rng.unit_open(), u1 = rng.unit_open();
                double u2 = rng.unit_open(), u3 = rng.unit_open();
                std::uint64_t b0 = 0x5540000000000000ULL - std::bit_cast<std::uint64_t>(u0) / 3;
                std::uint64_t b1 = 0x5540000000000000ULL - std::bit_cast<std::uint64_t>(u1) / 3;
                std::uint64_t b2 = 0x5540000000000000ULL - std::bit_cast<std::uint64_t>(u2) / 3;
                std::uint64_t b3 = 0x5540000000000000ULL - std::bit_cast<std::uint64_t>(u3) / 3;
                double y0 = std::bit_cast<double>(b0), y1 = std::bit_cast<double>(b1);
                double y2 = std::bit_cast<double>(b2), y3 = std::bit_cast<double>(b3);
                for (int k = 0; k < 5; ++k) {
                    y0 = y0 * (4.0 - u0 * y0 * y0 * y0) * (1.0 / 3.0);
                    y1 = y1 * (4.0 - u1 * y1 * y1 * y1) * (1.0 / 3.0);
                    y2 = y2 * (4.0 - u2 * y2 * y2 * y2) * (1.0 / 3.0);
                    y3 = y3 * (4.0 - u3 * y3 * y3 * y3) * (1.0 / 3.0);
                }
                out[i] = xm_ * y0;
                out[i + 1] = xm_ * y1;
                out[i + 2] = xm_ * y2;
                out[i + 3] = xm_ * y3;
            }
            for (; i < out.size(); ++i) out[i] = xm_ * inv_cbrt(rng.unit_open());
        } else {
            const double e = -1.0 / alpha_;
            for (double& v : out) v = xm_ * std::pow(rng.unit_open(), e);
        }
    }

    double alpha() const { return alpha_; }

  private:
    double alpha_, xm_;
};

// ---------------------------------------------------------------------------
// Weibull: tail exp(-(x/scale)^shape) on [0, inf); subexponential for shape < 1
// ---------------------------------------------------------------------------
class Weibull final : public Distribution {
  public:
    explicit Weibull(double shape, double scale = 1.0) : shape_(shape), scale_(scale) {
        if (!(shape > 0.0)) throw ConfigError("weibull: shape must be > 0");
        if (!(scale > 0.0)) throw ConfigError("weibull: scale must be > 0");
    }

    double tail(double x) const override {
        if (x <= 0.0) return 1.0;
        return std::exp(-std::pow(x / scale_, shape_));
    }
    double quantile_from_tail(double t) const override { return scale_ * std::pow(-std::log(t), 1.0 / shape_); }
    double lower_bound() const override { return 0.0; }
    MdaClass mda_class() const override { return MdaClass::Gumbel; }
    std::optional<StableAttraction> stable_attraction() const override { return StableAttraction{2.0, true}; }
    std::optional<double> mean() const override { return scale_ * std::tgamma(1.0 + 1.0 / shape_); }
    std::optional<double> variance() const override {
        double g1 = std::tgamma(1.0 + 1.0 / shape_);
        double g2 = std::tgamma(1.0 + 2.0 / shape_);
        return scale_ * scale_ * (g2 - g1 * g1);
    }
    std::string spec_string() const override {
        std::ostringstream os;
        os << "weibull:shape=" << shape_;
        if (scale_ != 1.0) os << ",scale=" << scale_;
        return os.str();
    }

  private:
    double shape_, scale_;
};

// ---------------------------------------------------------------------------
// LogNormal: ln X ~ N(mu, sigma^2)
// ---------------------------------------------------------------------------
class LogNormal final : public Distribution {
  public:
    explicit LogNormal(double mu = 0.0, double sigma = 1.0) : mu_(mu), sigma_(sigma) {
        if (!(sigma > 0.0)) throw ConfigError("lognormal: sigma must be > 0");
    }

    double tail(double x) const override {
        if (x <= 0.0) return 1.0;
        return std_normal_tail((std::log(x) - mu_) / sigma_);
    }
    double quantile_from_tail(double t) const override {
        if (t >= 1.0) return 0.0;
        return std::exp(mu_ + sigma_ * std_normal_upper_quantile(t));
    }
    double lower_bound() const override { return 0.0; }
    MdaClass mda_class() const override { return MdaClass::Gumbel; }
    std::optional<StableAttraction> stable_attraction() const override { return StableAttraction{2.0, true}; }
    std::optional<double> mean() const override { return std::exp(mu_ + sigma_ * sigma_ / 2.0); }
    std::optional<double> variance() const override {
        double s2 = sigma_ * sigma_;
        return (std::exp(s2) - 1.0) * std::exp(2.0 * mu_ + s2);
    }
    std::string spec_string() const override {
        std::ostringstream os;
        os << "lognormal:mu=" << mu_ << ",sigma=" << sigma_;
        return os.str();
    }

  private:
    double mu_, sigma_;
};

// ---------------------------------------------------------------------------
// Zeta lattice: p(k) = k^{-(alpha+1)} / zeta(alpha+1) on k = 1,2,...; span 1.
// Tail values are carried in a table built back-to-front from the
// Euler-Maclaurin remainder so deep-tail entries keep full relative precision.
// ---------------------------------------------------------------------------
class Zeta final : public Distribution {
  public:
    explicit Zeta(double alpha) : alpha_(alpha), s_(alpha + 1.0) {
        if (!(alpha > 0.0)) throw ConfigError("zeta: alpha must be > 0");
        norm_ = riemann_zeta(s_);
        std::uint64_t cap = 1;
        while (hurwitz_tail(s_, cap + 1) / norm_ > 1e-13 && cap < (1ULL << 21)) cap *= 2;
        tail_.resize(cap + 1);
        tail_[cap] = hurwitz_tail(s_, cap + 1) / norm_;
        for (std::uint64_t k = cap; k >= 1; --k)
            tail_[k - 1] = tail_[k] + std::pow(static_cast<double>(k), -s_) / norm_;
    }

    double pmf(std::uint64_t k) const {
        if (k < 1) return 0.0;
        return std::pow(static_cast<double>(k), -s_) / norm_;
    }

    double tail(double x) const override {
        if (x < 1.0) return 1.0;
        double f = std::floor(x);
        if (f < static_cast<double>(tail_.size())) return tail_[static_cast<std::size_t>(f)];
        return hurwitz_tail(s_, static_cast<std::uint64_t>(f) + 1) / norm_;
    }

    double quantile_from_tail(double t) const override {
        // tie slack: p = F(k) reaches k even after a 1 - (1 - tail) round trip,
        // whose error is a few ulp of 1, i.e. absolute
        double slack = 1e-15 + t * 4e-16;
        if (t + slack >= tail_[0]) return 1.0;
        if (t >= tail_.back()) {
            // smallest k with tail(k) <= t on the decreasing table
            std::size_t lo = 0, hi = tail_.size() - 1;
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (tail_[mid] <= t + slack)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            return static_cast<double>(lo);
        }
        // beyond the table: invert the Euler-Maclaurin leading term, then step
        double guess = std::pow((s_ - 1.0) * norm_ * t, 1.0 / (1.0 - s_));
        std::uint64_t k = static_cast<std::uint64_t>(std::max(guess - 2.0, 1.0));
        while (hurwitz_tail(s_, k + 1) / norm_ > t) ++k;
        while (k > 1 && hurwitz_tail(s_, k) / norm_ <= t) --k;
        return static_cast<double>(k);
    }

    double lower_bound() const override { return 1.0; }
    double lattice_span() const override { return 1.0; }
    MdaClass mda_class() const override { return MdaClass::Frechet; }
    std::optional<StableAttraction> stable_attraction() const override {
        if (alpha_ > 2.0) return StableAttraction{2.0, true};
        return StableAttraction{alpha_, false};
    }
    std::optional<double> tail_index() const override { return alpha_; }
    std::optional<double> mean() const override {
        if (alpha_ <= 1.0) return std::nullopt;
        return riemann_zeta(alpha_) / norm_;
    }
    std::optional<double> variance() const override {
        if (alpha_ <= 2.0) return std::nullopt;
        double m = riemann_zeta(alpha_) / norm_;
        return riemann_zeta(alpha_ - 1.0) / norm_ - m * m;
    }
    std::string spec_string() const override {
        std::ostringstream os;
        os << "zeta:alpha=" << alpha_;
        return os.str();
    }

    double alpha() const { return alpha_; }
    double norm() const { return norm_; }

  private:
    double alpha_, s_, norm_;
    std::vector<double> tail_;
};

// ---------------------------------------------------------------------------
// The block-redistributed Pareto. Mass of the Pareto(alpha) base measure on
// [d_k, d_{k+1}) is spread uniformly over [d_k, d_k + eps*c_k) and the rest of
// the block is empty. c_k = 1 + c_scale*k, so c_{k+1}/c_k -> 1 and d_1 = 1
// matches the base measure's support edge (total mass exactly 1).
// ---------------------------------------------------------------------------
struct CounterexampleParams {
    double alpha = 3.0;
    double eps = 0.5;
    double c_scale = 1.0;
};

class Counterexample final : public Distribution {
  public:
    explicit Counterexample(CounterexampleParams p, std::size_t max_blocks = 200000) : p_(p) {
        if (!(p.alpha > 0.0)) throw ConfigError("counterexample: alpha must be > 0");
        if (!(p.eps > 0.0) || !(p.eps < 1.0)) throw ConfigError("counterexample: eps must be in (0,1)");
        if (!(p.c_scale > 0.0)) throw ConfigError("counterexample: c_scale must be > 0");
        c_.resize(max_blocks + 1);
        d_.resize(max_blocks + 2);
        // c_[k] = c_k for k >= 0; d_[k] = sum_{j=1..k} c_{j-1}, d_[1] = c_0 = 1
        for (std::size_t k = 0; k <= max_blocks; ++k) c_[k] = 1.0 + p.c_scale * static_cast<double>(k);
        d_[0] = 0.0;
        for (std::size_t k = 1; k <= max_blocks + 1; ++k) d_[k] = d_[k - 1] + c_[k - 1];
    }

    double block_start(std::size_t k) const { return d_.at(k); }
    double block_interval(std::size_t k) const { return c_.at(k); }

    double tail(double x) const override {
        if (x < d_[1]) return 1.0;
        if (x >= d_.back()) throw Error("counterexample: x beyond precomputed blocks");
        std::size_t k = block_index(x);
        double tail_next = base_tail(d_[k + 1]);
        double filled_end = d_[k] + p_.eps * c_[k];
        if (x >= filled_end) return tail_next;
        double w = base_tail(d_[k]) - tail_next;  // block mass
        return tail_next + w * (filled_end - x) / (p_.eps * c_[k]);
    }

    double quantile_from_tail(double t) const override {
        if (t >= 1.0) return d_[1];
        // block k with base_tail(d_{k+1}) <= t < base_tail(d_k)
        std::size_t lo = 1, hi = d_.size() - 2;
        if (t < base_tail(d_[hi + 1])) throw Error("counterexample: quantile beyond precomputed blocks");
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (base_tail(d_[mid + 1]) <= t)
                hi = mid;
            else
                lo = mid + 1;
        }
        std::size_t k = lo;
        double tail_next = base_tail(d_[k + 1]);
        double w = base_tail(d_[k]) - tail_next;
        double frac = (base_tail(d_[k]) - t) / w;  // in [0,1]
        double y = d_[k] + frac * p_.eps * c_[k];
        return std::min(y, d_[k] + p_.eps * c_[k]);
    }

    double lower_bound() const override { return d_[1]; }
    MdaClass mda_class() const override { return MdaClass::Frechet; }
    std::optional<StableAttraction> stable_attraction() const override {
        if (p_.alpha > 2.0) return StableAttraction{2.0, true};
        return StableAttraction{p_.alpha, false};
    }
    std::optional<double> tail_index() const override { return p_.alpha; }
    std::optional<double> mean() const override { return std::nullopt; }
    std::optional<double> variance() const override { return std::nullopt; }
    std::string spec_string() const override {
        std::ostringstream os;
        os << "counterexample:alpha=" << p_.alpha << ",eps=" << p_.eps;
        return os.str();
    }

    const CounterexampleParams& params() const { return p_; }

  private:
    double base_tail(double x) const { return std::pow(x, -p_.alpha); }  // Pareto base, lower = d_1 = c_base

    std::size_t block_index(double x) const {
        std::size_t lo = 1, hi = d_.size() - 2;
        while (lo < hi) {  // largest k with d_[k] <= x
            std::size_t mid = (lo + hi + 1) / 2;
            if (d_[mid] <= x)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    CounterexampleParams p_;
    std::vector<double> c_, d_;
};

// ---------------------------------------------------------------------------
// psi(x): residual scale. Frechet families scale with x itself; Gumbel
// families solve tail(x+psi)/tail(x) = 1/e by bracketed bisection.
// ---------------------------------------------------------------------------
inline double residual_scale_psi(const Distribution& dist, double x) {
    if (dist.mda_class() == MdaClass::None) throw NoMdaClass(dist.spec_string() + ": no max-domain of attraction");
    double t0 = dist.tail(x);
    if (!(t0 > 0.0)) throw Error("residual_scale_psi: tail vanishes at x");
    if (dist.mda_class() == MdaClass::Frechet) return x;
    const double target = t0 * std::exp(-1.0);
    double hi = 1.0;
    while (dist.tail(x + hi) > target) {
        hi *= 2.0;
        if (hi > 1e300) throw Error("residual_scale_psi: no bracket");
    }
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (dist.tail(x + mid) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-9 * hi) break;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// spec-string parser: family:key=val,key=val
// ---------------------------------------------------------------------------
namespace detail {

inline std::vector<std::pair<std::string, double>> parse_kv(const std::string& body, const std::string& family) {
    std::vector<std::pair<std::string, double>> kv;
    if (body.empty()) return kv;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError(family + ": expected key=value, got '" + item + "'");
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        try {
            std::size_t pos = 0;
            double v = std::stod(val, &pos);
            if (pos != val.size()) throw std::invalid_argument(val);
            kv.emplace_back(key, v);
        } catch (const std::exception&) {
            throw ConfigError(family + ": bad numeric value for key '" + key + "': '" + val + "'");
        }
    }
    return kv;
}

inline double take(std::vector<std::pair<std::string, double>>& kv, const std::string& key, double fallback,
                   bool required = false) {
    for (auto it = kv.begin(); it != kv.end(); ++it) {
        if (it->first == key) {
            double v = it->second;
            kv.erase(it);
            return v;
        }
    }
    if (required) throw ConfigError("missing required key '" + key + "'");
    return fallback;
}

}  // namespace detail

inline DistPtr make_distribution(const std::string& spec) {
    auto colon = spec.find(':');
    std::string family = spec.substr(0, colon);
    std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto kv = detail::parse_kv(body, family);
    DistPtr out;
    if (family == "pareto") {
        double alpha = detail::take(kv, "alpha", 0.0, true);
        double lower = detail::take(kv, "lower", 1.0);
        out = std::make_shared<Pareto>(alpha, lower);
    } else if (family == "weibull") {
        double shape = detail::take(kv, "shape", 0.0, true);
        double scale = detail::take(kv, "scale", 1.0);
        out = std::make_shared<Weibull>(shape, scale);
    } else if (family == "lognormal") {
        double mu = detail::take(kv, "mu", 0.0);
        double sigma = detail::take(kv, "sigma", 1.0);
        out = std::make_shared<LogNormal>(mu, sigma);
    } else if (family == "zeta") {
        double alpha = detail::take(kv, "alpha", 0.0, true);
        out = std::make_shared<Zeta>(alpha);
    } else if (family == "counterexample") {
        CounterexampleParams p;
        p.alpha = detail::take(kv, "alpha", 0.0, true);
        p.eps = detail::take(kv, "eps", 0.5);
        p.c_scale = detail::take(kv, "c_scale", 1.0);
        out = std::make_shared<Counterexample>(p);
    } else {
        throw ConfigError("unknown distribution family '" + family + "'");
    }
    if (!kv.empty()) throw ConfigError(family + ": unknown key '" + kv.front().first + "'");
    return out;
}

}  // namespace bigjump
