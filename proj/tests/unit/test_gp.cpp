#include "oracles.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/fit.hpp"
#include "shortgp/gp.hpp"
#include "shortgp/optimize.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace shortgp;

namespace {

KernelSpec se(double sf2, double ell) { return {KernelFamily::squared_exponential(), sf2, ell}; }

TimeSeries make_series(std::vector<double> t, std::vector<double> y) {
    TimeSeries s;
    s.id = "s";
    s.times = std::move(t);
    s.values = std::move(y);
    return s;
}

double kernel_oracle(const KernelSpec& k, double r) {
    if (!k.family.is_matern()) return oracle::se_kernel(k.signal_variance, k.length_scale, r);
    return oracle::matern_kernel(k.family.nu, k.signal_variance, k.length_scale, r);
}

oracle::Matrix gram(const KernelSpec& k, const std::vector<double>& a, const std::vector<double>& b) {
    oracle::Matrix m(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) m[i][j] = kernel_oracle(k, std::abs(a[i] - b[j]));
    }
    return m;
}

// Log-likelihood as a function of (log sf2, log ell, log sn2), from the dense oracle.
double oracle_lml(const TimeSeries& s, const KernelFamily& family, double lsf2, double lell, double lsn2) {
    const KernelSpec k{family, std::exp(lsf2), std::exp(lell)};
    auto m = gram(k, s.times, s.times);
    for (std::size_t i = 0; i < m.size(); ++i) m[i][i] += std::exp(lsn2);
    return oracle::log_marginal_likelihood(m, s.values);
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("series validation") {
    CHECK_THROWS_AS(make_series({0, 1}, {1}).validate(), DataError);
    CHECK_THROWS_AS(make_series({0, 0}, {1, 2}).validate(), DataError);
    CHECK_NOTHROW(make_series({1, 0}, {1, 2}).validate(false));
    CHECK_THROWS_AS(make_series({0, NAN}, {1, 2}).validate(false), DataError);
    auto s = make_series({0, 1}, {1, 2});
    s.noise_variances = std::vector<double>{0.1, -0.1};
    CHECK_THROWS_AS(s.validate(), DataError);

    const auto c = centered(make_series({0, 1, 2}, {1, 2, 6}));
    CHECK(std::accumulate(c.values.begin(), c.values.end(), 0.0) == doctest::Approx(0.0));
}

TEST_CASE("log marginal likelihood small cases") {
    CHECK(log_marginal_likelihood(make_series({0}, {0}), se(1, 1), EstimatedNoise{1.0}) ==
          doctest::Approx(-0.5 * std::log(4 * oracle::pi)).epsilon(1e-15));

    // 2x2 by hand: K = [[a, b], [b, a]].
    const double sf2 = 1.3, ell = 0.8, sn2 = 0.2, t1 = 0.0, t2 = 0.5, y1 = 0.7, y2 = -0.4;
    const double a = sf2 + sn2, b = sf2 * std::exp(-(t2 - t1) * (t2 - t1) / (2 * ell * ell));
    const double det = a * a - b * b;
    const double quad = (a * y1 * y1 - 2 * b * y1 * y2 + a * y2 * y2) / det;
    const double expected = -0.5 * quad - 0.5 * std::log(det) - std::log(2 * oracle::pi);
    CHECK(log_marginal_likelihood(make_series({t1, t2}, {y1, y2}), se(sf2, ell), EstimatedNoise{sn2}) ==
          doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("log marginal likelihood matches the dense oracle") {
    oracle::Generator gen(31);
    for (int i = 0; i < 50; ++i) {
        const int n = gen.integer(3, 12);
        auto s = make_series(gen.times(n), gen.values(n));
        const KernelFamily family = gen.integer(0, 1) ? KernelFamily::matern(1.5) : KernelFamily::squared_exponential();
        const double lsf2 = gen.uniform(-1, 1), lell = gen.uniform(-1, 1), lsn2 = gen.uniform(-3, 0);
        CHECK(log_marginal_likelihood(s, {family, std::exp(lsf2), std::exp(lell)}, EstimatedNoise{std::exp(lsn2)}) ==
              doctest::Approx(oracle_lml(s, family, lsf2, lell, lsn2)).epsilon(1e-9));
    }
}

TEST_CASE("log marginal likelihood is invariant to joint permutation") {
    oracle::Generator gen(37);
    for (int i = 0; i < 30; ++i) {
        const int n = gen.integer(4, 10);
        auto s = make_series(gen.times(n), gen.values(n));
        std::vector<std::size_t> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t k = order.size() - 1; k > 0; --k) std::swap(order[k], order[gen.next() % (k + 1)]);
        TimeSeries p = s;
        for (std::size_t k = 0; k < order.size(); ++k) {
            p.times[k] = s.times[order[k]];
            p.values[k] = s.values[order[k]];
        }
        const KernelSpec k{KernelFamily::matern(2.5), 1.1, 0.9};
        CHECK(std::abs(log_marginal_likelihood(p, k, EstimatedNoise{0.05}) - log_marginal_likelihood(s, k, EstimatedNoise{0.05})) < 1e-10);
    }
}

TEST_CASE("gradient matches finite differences on random instances") {
    oracle::Generator gen(41);
    const KernelFamily families[] = {KernelFamily::squared_exponential(), KernelFamily::matern(0.5),
                                     KernelFamily::matern(1.5), KernelFamily::matern(2.5)};
    for (int i = 0; i < 200; ++i) {
        const int n = gen.integer(5, 15);
        auto s = make_series(gen.times(n, 0.3, 1.5), gen.values(n));
        const KernelFamily family = families[i % 4];
        const double lsf2 = gen.uniform(-1, 1.5), lell = gen.uniform(-0.7, 1.5), lsn2 = gen.uniform(-3, 0);
        const auto g = log_marginal_likelihood_gradient(s, {family, std::exp(lsf2), std::exp(lell)}, EstimatedNoise{std::exp(lsn2)});
        auto lml = [&](double a, double b, double c) {
            return log_marginal_likelihood(s, {family, std::exp(a), std::exp(b)}, EstimatedNoise{std::exp(c)});
        };
        const double h = 1e-5;
        const double fd0 = (lml(lsf2 + h, lell, lsn2) - lml(lsf2 - h, lell, lsn2)) / (2 * h);
        const double fd1 = (lml(lsf2, lell + h, lsn2) - lml(lsf2, lell - h, lsn2)) / (2 * h);
        const double fd2 = (lml(lsf2, lell, lsn2 + h) - lml(lsf2, lell, lsn2 - h)) / (2 * h);
        const double scale = std::max({1.0, std::abs(fd0), std::abs(fd1), std::abs(fd2)});
        CAPTURE(i);
        CHECK(std::abs(g.log_signal_variance - fd0) < 1e-5 * scale);
        CHECK(std::abs(g.log_length_scale - fd1) < 1e-5 * scale);
        REQUIRE(g.log_noise_variance);
        CHECK(std::abs(*g.log_noise_variance - fd2) < 1e-5 * scale);
    }
}

TEST_CASE("gradient with fixed noise has no noise component") {
    auto s = make_series({0, 1, 2}, {0.1, 0.5, -0.2});
    const auto g = log_marginal_likelihood_gradient(s, se(1, 1), FixedNoise{{0.1, 0.2, 0.1}});
    CHECK_FALSE(g.log_noise_variance.has_value());
}

TEST_CASE("gradient vanishes at a located maximum") {
    auto s = make_series({-2, -1, 0, 1, 2, 3}, {0.2, 0.9, 1.1, 0.8, 0.1, -0.3});
    const Objective f = [&](const Eigen::VectorXd& x) -> std::optional<Evaluation> {
        const KernelSpec k = se(std::exp(x(0)), std::exp(x(1)));
        const ConditionedGp gp(s, k, EstimatedNoise{std::exp(x(2))});
        const auto g = gp.log_marginal_likelihood_gradient();
        Evaluation e;
        e.value = -gp.log_marginal_likelihood();
        e.gradient = Eigen::Vector3d(-g.log_signal_variance, -g.log_length_scale, -*g.log_noise_variance);
        return e;
    };
    OptimizerOptions options;
    options.gradient_tolerance = 1e-9;
    const auto r = minimize_bfgs(f, Eigen::Vector3d(0.0, 0.0, -2.0), options);
    const auto g = log_marginal_likelihood_gradient(s, se(std::exp(r.x(0)), std::exp(r.x(1))), EstimatedNoise{std::exp(r.x(2))});
    const double norm = std::sqrt(g.log_signal_variance * g.log_signal_variance + g.log_length_scale * g.log_length_scale +
                                  *g.log_noise_variance * *g.log_noise_variance);
    CHECK(norm < 1e-5);
}

TEST_CASE("signal-variance gradient vanishes at the profile optimum") {
    oracle::Generator gen(43);
    for (int i = 0; i < 10; ++i) {
        auto s = make_series(gen.times(7), gen.values(7));
        const auto p = profile_signal_variance(s, KernelFamily::squared_exponential(), 1.2, 0.05);
        for (double f : {0.999, 1.001}) {
            CHECK(log_marginal_likelihood(s, se(f * p.signal_variance, 1.2), EstimatedNoise{0.05}) <=
                  p.log_marginal_likelihood + 1e-12);
        }
        // Gradient roundoff grows with sigma_f^2 / sigma_n^2; demand a tight zero only
        // where K is well conditioned and the optimum is interior.
        if (p.signal_variance > 1e-6 && p.signal_variance < 1e2) {
            const auto g = log_marginal_likelihood_gradient(s, se(p.signal_variance, 1.2), EstimatedNoise{0.05});
            CHECK(std::abs(g.log_signal_variance) < 1e-6);
        }
    }
}

TEST_CASE("posterior interpolates without noise and reverts to the prior far away") {
    auto s = make_series({0.0, 1.0, 2.5}, {0.3, -0.2, 0.9});
    const std::vector<double> at{1.0};
    const auto p = posterior_at(s, se(1.0, 0.7), EstimatedNoise{0.0}, at);
    CHECK(p.mean[0] == doctest::Approx(-0.2).epsilon(1e-8));
    CHECK(std::abs(p.variance_latent[0]) < 1e-8);

    const std::vector<double> far{1000.0};
    const auto q = posterior_at(s, se(1.7, 0.7), EstimatedNoise{0.1}, far);
    CHECK(std::abs(q.mean[0]) < 1e-12);
    CHECK(q.variance_latent[0] == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("posterior matches the dense oracle") {
    auto s = make_series({0.0, 1.0, 2.0}, {0.5, 1.0, -0.3});
    const KernelSpec k = se(1.2, 0.9);
    const double sn2 = 0.04;
    const std::vector<double> mid{0.5};
    const auto p = posterior_at(s, k, EstimatedNoise{sn2}, mid);

    auto kk = gram(k, s.times, s.times);
    for (int i = 0; i < 3; ++i) kk[i][i] += sn2;
    const auto inv = oracle::invert(kk);
    const auto ks = gram(k, mid, s.times)[0];
    const double mean = oracle::dot(ks, oracle::multiply(inv, s.values));
    const double var = k.signal_variance - oracle::dot(ks, oracle::multiply(inv, ks));
    CHECK(p.mean[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(p.variance_latent[0] == doctest::Approx(var).epsilon(1e-10));
    CHECK(p.variance_observed[0] == doctest::Approx(var + sn2).epsilon(1e-10));
}

TEST_CASE("observed minus latent variance is the noise variance") {
    oracle::Generator gen(47);
    for (int i = 0; i < 50; ++i) {
        const int n = gen.integer(3, 10);
        auto s = make_series(gen.times(n), gen.values(n));
        const double sn2 = gen.log_uniform(1e-4, 1.0);
        std::vector<double> q;
        for (int j = 0; j < 8; ++j) q.push_back(gen.uniform(-6, 20));
        const auto p = posterior_at(s, se(gen.log_uniform(0.1, 5), gen.log_uniform(0.2, 5)), EstimatedNoise{sn2}, q);
        for (std::size_t j = 0; j < q.size(); ++j) {
            CHECK(std::abs(p.variance_observed[j] - p.variance_latent[j] - sn2) < 1e-10);
            CHECK(p.variance_latent[j] >= 0.0);
        }
    }
}

TEST_CASE("posterior mean is linear in the observations") {
    oracle::Generator gen(53);
    for (int i = 0; i < 30; ++i) {
        const int n = gen.integer(3, 12);
        const auto t = gen.times(n);
        const auto y1 = gen.values(n), y2 = gen.values(n);
        const double a = gen.uniform(-3, 3), b = gen.uniform(-3, 3);
        std::vector<double> y3(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) y3[j] = a * y1[j] + b * y2[j];
        const KernelSpec k{KernelFamily::matern(1.5), 1.3, 0.8};
        std::vector<double> q;
        for (int j = 0; j < 6; ++j) q.push_back(gen.uniform(-4, 15));
        const auto p1 = posterior_at(make_series(t, y1), k, EstimatedNoise{0.01}, q);
        const auto p2 = posterior_at(make_series(t, y2), k, EstimatedNoise{0.01}, q);
        const auto p3 = posterior_at(make_series(t, y3), k, EstimatedNoise{0.01}, q);
        for (std::size_t j = 0; j < q.size(); ++j) {
            CHECK(std::abs(p3.mean[j] - (a * p1.mean[j] + b * p2.mean[j])) < 1e-9);
        }
    }
}

TEST_CASE("inconsistent repeated observations make the noise identifiable") {
    // Two pairs of repeated times with different values.
    auto s = make_series({0.0, 0.0, 1.0, 1.0}, {0.5, -0.5, 1.0, 0.2});
    const KernelSpec k = se(1.0, 1.0);
    double previous = log_marginal_likelihood(s, k, EstimatedNoise{0.1});
    for (double sn2 : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double v = log_marginal_likelihood(s, k, EstimatedNoise{sn2});
        CHECK(v < previous);
        previous = v;
    }
}

TEST_CASE("predictive log-likelihood") {
    auto s = make_series({0.0, 1.0}, {0.4, 0.6});
    const KernelSpec k = se(1.0, 1.0);
    const std::vector<double> t{0.5, 3.0};
    const auto p = posterior_at(s, k, EstimatedNoise{0.1}, t);
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) expected += -0.5 * std::log(2 * oracle::pi * p.variance_latent[i]);
    CHECK(predictive_log_likelihood(s, k, EstimatedNoise{0.1}, t, p.mean) == doctest::Approx(expected).epsilon(1e-14));

    auto moved = p.mean;
    double last = predictive_log_likelihood(p, moved);
    for (int step = 0; step < 5; ++step) {
        moved[0] += 0.1;
        const double v = predictive_log_likelihood(p, moved);
        CHECK(v < last);
        last = v;
    }
}

TEST_CASE("predictive log-likelihood on the sinc grid matches per-point densities") {
    std::vector<double> t, y;
    for (int i = 0; i < 7; ++i) {
        t.push_back(-5.0 + 11.0 * i / 6.0);
        y.push_back(oracle::sinc(t.back()) + 0.1 * std::cos(3.0 * i));
    }
    const auto s = make_series(t, y);
    const auto result = fit(s, KernelFamily::squared_exponential(), synthetic_scenarios()[3], 7);
    std::vector<double> grid, truth;
    for (int i = 0; i < 10; ++i) {
        grid.push_back(-6.0 + 11.0 * i / 9.0);
        truth.push_back(oracle::sinc(grid.back()));
    }
    const auto p = posterior_at(s, result.kernel, result.noise_model(s), grid);
    double expected = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double v = std::max(p.variance_latent[i], kVarianceFloor);
        expected += -0.5 * std::log(2 * oracle::pi * v) - 0.5 * std::pow(truth[i] - p.mean[i], 2) / v;
    }
    CHECK(predictive_log_likelihood(s, result.kernel, result.noise_model(s), grid, truth) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("variance floor keeps interpolated points finite") {
    auto s = make_series({0.0, 1.0}, {0.4, 0.6});
    const std::vector<double> t{0.0};
    const std::vector<double> truth{0.4};
    const double v = predictive_log_likelihood(s, se(1, 1), EstimatedNoise{0.0}, t, truth);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(-0.5 * std::log(2 * oracle::pi * kVarianceFloor)).epsilon(1e-3));
}

TEST_CASE("mean squared error") {
    auto s = make_series({0.0, 1.0}, {0.4, 0.6});
    const KernelSpec k = se(1.0, 1.0);
    std::vector<double> grid, truth;
    for (int i = 0; i < 10; ++i) grid.push_back(-6.0 + 11.0 * i / 9.0);
    const auto p = posterior_at(s, k, EstimatedNoise{0.1}, grid);
    CHECK(mse(p, p.mean) == 0.0);

    // A zero series predicts zero everywhere.
    auto zero = make_series({0.0, 1.0}, {0.0, 0.0});
    double expected = 0.0;
    for (double g : grid) {
        truth.push_back(oracle::sinc(g));
        expected += truth.back() * truth.back();
    }
    expected /= 10.0;
    CHECK(mse(zero, k, EstimatedNoise{0.1}, grid, truth) == doctest::Approx(expected).epsilon(1e-14));

    const std::vector<double> one_t{0.5}, one_v{2.0};
    const auto one = posterior_at(s, k, EstimatedNoise{0.1}, one_t);
    CHECK(mse(one, one_v) == doctest::Approx(std::pow(2.0 - one.mean[0], 2)).epsilon(1e-14));
    CHECK_THROWS_AS(mse(s, k, EstimatedNoise{0.1}, std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST_CASE("fixed noise at query times") {
    auto s = make_series({0.0, 1.0, 3.0}, {0.1, 0.2, 0.3});
    s.noise_variances = std::vector<double>{0.1, 0.3, 0.5};
    const FixedNoise noise{*s.noise_variances};
    CHECK(noise_variance_at(noise, s, 1.0) == 0.3);
    CHECK(noise_variance_at(noise, s, 0.5) == doctest::Approx(0.2));
    CHECK(noise_variance_at(noise, s, 2.0) == doctest::Approx(0.4));
    CHECK(noise_variance_at(noise, s, -4.0) == 0.1);
    CHECK(noise_variance_at(noise, s, 9.0) == 0.5);
    CHECK(noise_variance_at(EstimatedNoise{0.07}, s, 9.0) == 0.07);
}

TEST_CASE("conditioned GP reuses its factorization") {
    auto s = make_series({0.0, 1.0, 2.0}, {0.1, 0.5, 0.2});
    const ConditionedGp gp(s, se(1.0, 1.0), EstimatedNoise{0.01});
    const std::vector<double> q{0.5, 1.5};
    const auto a = gp.predict(q);
    const auto b = posterior_at(s, se(1.0, 1.0), EstimatedNoise{0.01}, q);
    CHECK(a.mean == b.mean);
    CHECK(gp.log_marginal_likelihood() == log_marginal_likelihood(s, se(1.0, 1.0), EstimatedNoise{0.01}));
    CHECK(gp.jitter() == 0.0);
}

}  // TEST_SUITE
