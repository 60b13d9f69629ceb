#include <doctest.h>

#include <cmath>

#include "bigjump/distribution.hpp"
#include "bigjump/stat_tests.hpp"

using namespace bigjump;

TEST_CASE("pareto closed forms") {
    Pareto p2(2.0);
    CHECK(p2.tail(2.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p2.tail(1.0) == 1.0);
    CHECK(p2.tail(0.2) == 1.0);
    Pareto p1(1.0);
    CHECK(p1.quantile(0.5) == doctest::Approx(2.0).epsilon(1e-14));
    Pareto p3(3.0);
    CHECK(*p3.mean() == doctest::Approx(1.5));
    CHECK(*p3.variance() == doctest::Approx(0.75));
    CHECK(p3.mda_class() == MdaClass::Frechet);
    CHECK(!Pareto(1.5).variance().has_value());
    CHECK(!Pareto(0.8).mean().has_value());
}

TEST_CASE("weibull and lognormal closed forms") {
    Weibull w(0.5, 1.0);
    CHECK(w.quantile(1.0 - std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.tail(4.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(*w.mean() == doctest::Approx(2.0).epsilon(1e-12));  // Gamma(3) = 2
    LogNormal ln(0.0, 1.0);
    CHECK(ln.tail(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(*ln.mean() == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    // quantile-tail round trip deep in the tail
    for (double t : {1e-12, 1e-6, 1e-3, 0.2, 0.9}) {
        CHECK(ln.tail(ln.quantile_from_tail(t)) == doctest::Approx(t).epsilon(1e-9));
        CHECK(w.tail(w.quantile_from_tail(t)) == doctest::Approx(t).epsilon(1e-10));
    }
}

TEST_CASE("zeta lattice masses") {
    Zeta z(3.0);
    double z4 = std::pow(M_PI, 4.0) / 90.0;  // normalizer, closed form
    CHECK(z.norm() == doctest::Approx(z4).epsilon(1e-13));
    CHECK(z.pmf(1) == doctest::Approx(1.0 / z4).epsilon(1e-13));
    CHECK(z.tail(0.7) == 1.0);
    CHECK(z.tail(1.0) == doctest::Approx(1.0 - 1.0 / z4).epsilon(1e-12));
    // interval mass example: (2, 4] holds p(3) + p(4)
    double expect = (std::pow(3.0, -4.0) + std::pow(4.0, -4.0)) / z4;
    CHECK(z.interval_mass(2.0, 2.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK_THROWS_AS(z.interval_mass(2.0, 0.5), DeltaBelowSpan);
    CHECK(z.lattice_span() == 1.0);
    // quantile convention: smallest support point with F(k) >= p
    CHECK(z.quantile(0.5) == 1.0);
    CHECK(z.quantile(1.0 / z4 + 1e-12) == 2.0);
    CHECK_THROWS_AS(z.quantile(1.0), NoFiniteQuantile);
}

TEST_CASE("counterexample block structure") {
    Counterexample ce({3.0, 0.5, 1.0});
    // d_k = k(k+1)/2 for c_k = k+1
    CHECK(ce.block_start(1) == 1.0);
    CHECK(ce.block_start(2) == 3.0);
    CHECK(ce.block_start(3) == 6.0);
    CHECK(ce.block_interval(3) == 4.0);
    CHECK(ce.tail(6.0) == doctest::Approx(std::pow(6.0, -3.0)).epsilon(1e-12));
    for (std::size_t k : {2, 5, 10, 40})
        CHECK(ce.tail(ce.block_start(k)) ==
              doctest::Approx(std::pow(ce.block_start(k), -3.0)).epsilon(1e-10));
    // the gap carries exactly zero mass
    for (std::size_t k : {1, 3, 9}) {
        double gap_lo = ce.block_start(k) + 0.5 * ce.block_interval(k);
        double gap_hi = ce.block_start(k + 1);
        CHECK(ce.tail(gap_lo) == ce.tail(gap_hi - 1e-9));
        CHECK(ce.interval_mass(gap_lo, (gap_hi - gap_lo) * 0.999) == 0.0);
    }
    // independent oracle: integrate the block density numerically from d_3 up
    double integral = 0.0;
    std::size_t K = 4000;
    for (std::size_t k = 3; k < K; ++k) {
        double dk = ce.block_start(k), ck = ce.block_interval(k);
        double w = std::pow(dk, -3.0) - std::pow(ce.block_start(k + 1), -3.0);
        double height = w / (0.5 * ck);
        int cells = 16;  // midpoint rule over the filled part
        for (int c = 0; c < cells; ++c) integral += height * (0.5 * ck / cells);
    }
    integral += std::pow(ce.block_start(K), -3.0);  // base-measure remainder
    CHECK(ce.tail(6.0) == doctest::Approx(integral).epsilon(1e-9));
}

TEST_CASE("interval mass equals tail difference everywhere") {
    for (const char* spec : {"pareto:alpha=3", "weibull:shape=0.5", "lognormal:mu=0,sigma=1",
                             "counterexample:alpha=3,eps=0.5"}) {
        auto d = make_distribution(spec);
        for (double x : {0.5, 1.0, 2.7, 10.0, 55.5, 300.0})
            for (double s : {0.3, 1.0, 12.0}) {
                double lhs = d->interval_mass(x, s);
                double rhs = d->tail(x) - d->tail(x + s);
                CHECK(std::fabs(lhs - rhs) <= 1e-12);
            }
    }
    auto z = make_distribution("zeta:alpha=3");
    for (double x : {1.0, 2.5, 20.0})
        for (double s : {1.0, 4.0})
            CHECK(std::fabs(z->interval_mass(x, s) - (z->tail(x) - z->tail(x + s))) <= 1e-12);
}

TEST_CASE("long tail property approach") {
    // tail(x+y)/tail(x) -> 1; monotone approach within 0.01 at the cap
    for (const char* spec : {"pareto:alpha=3", "weibull:shape=0.5", "lognormal:mu=0,sigma=1", "zeta:alpha=3"}) {
        auto d = make_distribution(spec);
        double y = 1.0, prev = 0.0;
        for (double x : {1e2, 1e3, 1e4}) {
            double r = d->tail(x + y) / d->tail(x);
            CHECK(r > prev * 0.999999);  // approach is monotone up the grid
            prev = r;
        }
        CHECK(std::fabs(d->tail(1e4 + y) / d->tail(1e4) - 1.0) < 0.01);
    }
}

TEST_CASE("quantile-cdf round trip on continuity points") {
    for (const char* spec : {"pareto:alpha=2", "weibull:shape=1.4", "lognormal:mu=0.3,sigma=0.8"}) {
        auto d = make_distribution(spec);
        for (double p : {0.001, 0.1, 0.5, 0.9, 0.99999})
            CHECK(d->cdf(d->quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    }
    // lattice: quantile(cdf(k)) returns the point itself
    Zeta z(3.0);
    for (double k : {1.0, 2.0, 7.0}) CHECK(z.quantile(z.cdf(k)) == k);
}

TEST_CASE("samplers reproduce their law") {
    RngStream rng(777);
    auto ks_against = [&](const Distribution& d, std::size_t m) {
        std::vector<double> s(m);
        d.sample_into(s, rng);
        return ks_one_sample(s, [&](double t) { return d.cdf(t); });
    };
    CHECK(ks_against(*make_distribution("weibull:shape=0.5"), 100000) < 0.01);
    CHECK(ks_against(*make_distribution("pareto:alpha=2"), 100000) < 0.01);
    CHECK(ks_against(*make_distribution("lognormal:mu=0,sigma=1"), 100000) < 0.01);
    CHECK(ks_against(*make_distribution("counterexample:alpha=3,eps=0.5"), 100000) < 0.01);
    {
        // lattice family: compare atom frequencies instead (KS needs continuity)
        Zeta z(3.0);
        std::vector<double> s(200000);
        z.sample_into(s, rng);
        double chi = 0.0;
        for (long k = 1; k <= 6; ++k) {
            double expect = z.pmf(k) * 200000.0;
            double got = std::count(s.begin(), s.end(), double(k));
            chi += (got - expect) * (got - expect) / expect;
        }
        double tail_expect = z.tail(6.0) * 200000.0;
        double tail_got = std::count_if(s.begin(), s.end(), [](double v) { return v > 6.0; });
        chi += (tail_got - tail_expect) * (tail_got - tail_expect) / tail_expect;
        CHECK(chi_square_pvalue(chi, 6.0) > 1e-4);
    }

    // empirical mean of 1e6 pareto(3) draws within 3 sigma of 1.5
    auto p3 = make_distribution("pareto:alpha=3");
    std::vector<double> big(1000000);
    p3->sample_into(big, rng);
    double mean = sample_mean(big);
    CHECK(std::fabs(mean - 1.5) < 3.0 * std::sqrt(0.75 / 1e6));
}

TEST_CASE("sampling is deterministic per seed") {
    auto p = make_distribution("pareto:alpha=3");
    RngStream a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(p->sample(a) == p->sample(b));
}

TEST_CASE("fast inverse cube root matches pow") {
    RngStream rng(5);
    for (int i = 0; i < 300000; ++i) {
        double u = rng.unit_open();
        CHECK(inv_cbrt(u) == doctest::Approx(std::pow(u, -1.0 / 3.0)).epsilon(5e-15));
    }
}

TEST_CASE("residual scale psi") {
    auto p3 = make_distribution("pareto:alpha=3");
    CHECK(residual_scale_psi(*p3, 100.0) == 100.0);
    // unit-rate exponential tail: psi = 1 at every x
    Weibull expo(1.0, 1.0);
    for (double x : {0.5, 3.0, 40.0}) CHECK(residual_scale_psi(expo, x) == doctest::Approx(1.0).epsilon(1e-8));
    // weibull(1/2): sqrt(x + psi) - sqrt(x) = 1 has the closed root 2 sqrt(x) + 1
    Weibull w(0.5, 1.0);
    CHECK(residual_scale_psi(w, 100.0) == doctest::Approx(21.0).epsilon(1e-8));
    // bisection oracle on the tail ratio agrees
    double lo = 0.0, hi = 64.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (w.tail(100.0 + mid) / w.tail(100.0) > std::exp(-1.0))
            lo = mid;
        else
            hi = mid;
    }
    CHECK(residual_scale_psi(w, 100.0) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));

    struct NoMda final : Distribution {
        double tail(double x) const override { return x <= 0 ? 1.0 : 1.0 / (1.0 + x); }
        double quantile_from_tail(double t) const override { return 1.0 / t - 1.0; }
        double lower_bound() const override { return 0.0; }
        MdaClass mda_class() const override { return MdaClass::None; }
        std::optional<StableAttraction> stable_attraction() const override { return std::nullopt; }
        std::optional<double> mean() const override { return std::nullopt; }
        std::optional<double> variance() const override { return std::nullopt; }
        std::string spec_string() const override { return "nomda"; }
    } nomda;
    CHECK_THROWS_AS(residual_scale_psi(nomda, 10.0), NoMdaClass);
}

TEST_CASE("spec string parser") {
    CHECK(make_distribution("pareto:alpha=3")->spec_string() == "pareto:alpha=3");
    CHECK(make_distribution("weibull:shape=0.5,scale=2")->tail(0.0) == 1.0);
    CHECK_THROWS_WITH_AS(make_distribution("pareto:alpha=3,bogus=1"), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(make_distribution("pareto:alpha=abc"), doctest::Contains("alpha"), ConfigError);
    CHECK_THROWS_AS(make_distribution("gauss:mu=0"), ConfigError);
    CHECK_THROWS_AS(make_distribution("weibull:scale=2"), ConfigError);  // missing required shape
    CHECK_THROWS_AS(make_distribution("counterexample:alpha=3,eps=1.2"), ConfigError);
}
