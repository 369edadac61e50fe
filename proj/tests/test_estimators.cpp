#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "selfnorm/dgp.hpp"
#include "selfnorm/estimators.hpp"

using namespace selfnorm;
using std::numbers::pi;

namespace {

TimeSeries series(std::vector<double> v) { return TimeSeries(std::move(v)); }

TimeSeries noise(std::size_t n, std::uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return TimeSeries(std::move(v));
}

std::vector<double> values(const EstimateSequence& s) { return {s.flat().begin(), s.flat().end()}; }

std::vector<EstimatorSpec> all_specs() {
    return {EstimatorSpec::mean(),
            EstimatorSpec::median(),
            EstimatorSpec::autocov(0),
            EstimatorSpec::autocov(2),
            EstimatorSpec::autocov(1, AutocovDivisor::NMinusLag),
            EstimatorSpec::autocorr(1),
            EstimatorSpec::autocorr(3),
            EstimatorSpec::spectral_mean(PhiSpec::indicator(pi / 2)),
            EstimatorSpec::spectral_mean(PhiSpec::cosine(2)),
            EstimatorSpec::spectral_ratio(PhiSpec::indicator(pi / 3)),
            EstimatorSpec::lad_ar(1),
            EstimatorSpec::lad_ar(2)};
}

}  // namespace

TEST_CASE("prefix_mean examples") {
    CHECK(values(prefix_mean(series({1, 2, 3, 4, 5}))) == std::vector<double>{1, 1.5, 2, 2.5, 3});
    CHECK(values(prefix_mean(series({2.5, 2.5, 2.5}))) == std::vector<double>{2.5, 2.5, 2.5});
    CHECK(values(prefix_mean(series({-1, 1}))) == std::vector<double>{-1, 0});
    CHECK(prefix_mean(series({1, 2})).first_valid() == 1);
}

TEST_CASE("prefix_median examples") {
    CHECK(values(prefix_median(series({3, 1, 2}))) == std::vector<double>{3, 2, 2});
    CHECK(values(prefix_median(series({1, 2, 3, 4, 5}))) == std::vector<double>{1, 1.5, 2, 2.5, 3});
    CHECK(values(prefix_median(series({7, 7, 7, 7}))) == std::vector<double>{7, 7, 7, 7});
}

TEST_CASE("prefix_median matches sorting at every prefix") {
    const auto ts = noise(301, 5);
    const auto seq = prefix_median(ts);
    for (std::size_t t = 1; t <= ts.size(); ++t) {
        CHECK(seq.scalar_at(t) == oracle::median_by_sort(ts.values().subspan(0, t)));
    }
}

TEST_CASE("prefix_autocov examples") {
    const auto alt = series({1, -1, 1, -1});
    const auto seq = prefix_autocov(alt, 1);
    CHECK(seq.first_valid() == 3);
    CHECK(seq.final_estimate()[0] == doctest::Approx(-0.75).epsilon(1e-14));

    const auto ts = noise(200, 1);
    const auto var = prefix_autocov(ts, 0);
    for (std::size_t t = var.first_valid(); t <= ts.size(); ++t) CHECK(var.scalar_at(t) >= 0.0);

    const auto big = noise(500, 2);
    CHECK(std::abs(prefix_autocov(big, 1).final_estimate()[0]) < 0.2);
    CHECK_THROWS_AS((void)prefix_autocov(series({1, 2, 3}), 3), Error);
}

TEST_CASE("prefix_autocov matches a double-loop oracle at every prefix, both divisors") {
    const auto ts = noise(120, 3);
    for (std::size_t k : {0, 1, 4}) {
        const auto full = prefix_autocov(ts, k);
        const auto trunc = prefix_autocov(ts, k, AutocovDivisor::NMinusLag);
        for (std::size_t t = full.first_valid(); t <= ts.size(); ++t) {
            const auto head = ts.values().subspan(0, t);
            CHECK(full.scalar_at(t) == doctest::Approx(oracle::autocov(head, k)).epsilon(1e-10));
            CHECK(trunc.scalar_at(t) == doctest::Approx(oracle::autocov(head, k, false)).epsilon(1e-10));
        }
    }
}

TEST_CASE("prefix_autocorr examples") {
    CHECK(prefix_autocorr(series({1, -1, 1, -1}), 1).final_estimate()[0] == doctest::Approx(-0.75));
    std::vector<double> trend(100);
    for (std::size_t i = 0; i < trend.size(); ++i) trend[i] = static_cast<double>(i + 1);
    const double r = prefix_autocorr(series(trend), 1).final_estimate()[0];
    const auto tv = series(trend);
    const double ref = oracle::autocov(tv.values(), 1) / oracle::autocov(tv.values(), 0);
    CHECK(r == doctest::Approx(ref).epsilon(1e-12));
    CHECK(r > 0.9);
    CHECK(r <= 1.0);
    try {
        (void)prefix_autocorr(series({2, 2, 2, 2, 2}), 1);
        FAIL("expected DegenerateVariance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateVariance);
    }
}

TEST_CASE("fourier_coeffs examples") {
    const auto full = fourier_coeffs(PhiSpec::indicator(pi), 6);
    CHECK(full.g[0] == doctest::Approx(0.5));
    for (std::size_t k = 1; k <= 6; ++k) CHECK(full.g[k] == 0.0);

    const auto half = fourier_coeffs(PhiSpec::indicator(pi / 2), 3);
    CHECK(half.g[0] == doctest::Approx(0.25));
    CHECK(half.g[1] == doctest::Approx(1.0 / pi));
    CHECK(std::abs(half.g[2]) < 1e-15);
    CHECK(half.g[3] == doctest::Approx(-1.0 / (3.0 * pi)));

    const auto cos2 = fourier_coeffs(PhiSpec::cosine(2), 4);
    CHECK(cos2.g == std::vector<double>{0, 0, 1, 0, 0});
    CHECK_THROWS_AS((void)PhiSpec::indicator(4.0), Error);
}

TEST_CASE("spectral means: indicator(pi), cosine and quadrature") {
    const auto ts = noise(200, 9);
    const auto full = prefix_spectral_mean(ts, PhiSpec::indicator(pi));
    const auto var = prefix_autocov(ts, 0);
    CHECK(full.first_valid() == 4);
    for (std::size_t t = 4; t <= ts.size(); ++t) CHECK(full.scalar_at(t) == doctest::Approx(var.scalar_at(t) / 2).epsilon(1e-10));

    for (std::size_t m : {1, 3}) {
        const auto cs = prefix_spectral_mean(ts, PhiSpec::cosine(m));
        const auto ac = prefix_autocov(ts, m);
        for (std::size_t t = m + 2; t <= ts.size(); ++t) {
            if (t < cs.first_valid()) continue;
            CHECK(cs.scalar_at(t) == doctest::Approx(ac.scalar_at(t)).epsilon(1e-10));
        }
    }

    const double g = prefix_spectral_mean(ts, PhiSpec::indicator(pi / 2)).final_estimate()[0];
    const double quad = oracle::spectral_distribution(ts.values(), pi / 2);
    CHECK(std::abs(g - quad) < 1e-8);
    CHECK(g == doctest::Approx(oracle::autocov(ts.values(), 0) / 4).epsilon(0.3));
}

TEST_CASE("spectral ratio examples") {
    const auto ts = noise(150, 11);
    for (double v : values(prefix_spectral_ratio(ts, PhiSpec::indicator(pi)))) CHECK(v == 1.0);
    for (double v : values(prefix_spectral_ratio(ts, PhiSpec::indicator(0)))) CHECK(v == 0.0);

    RngStream rng(3, 3);
    const auto ar = generate(ModelSpec::ar1(0.7, ModelSpec::Innovation::Normal), 400, rng);
    const double ratio = prefix_spectral_ratio(ar, PhiSpec::indicator(pi / 2)).final_estimate()[0];
    const double quad = oracle::spectral_distribution(ar.values(), pi / 2) / oracle::spectral_distribution(ar.values(), pi);
    CHECK(ratio == doctest::Approx(quad).epsilon(1e-8));
    CHECK(ratio > 0.5);  // low frequencies dominate an AR(1) with positive coefficient
    CHECK(ratio <= 1.0);
}

TEST_CASE("LAD autoregression") {
    std::vector<double> x(40);
    x[0] = 3.0;
    for (std::size_t t = 1; t < x.size(); ++t) x[t] = 0.5 * x[t - 1] + ((t % 7 == 0) ? 1.0 : 0.0);
    // exact recursion except for occasional shocks that LAD ignores
    const auto noiseless = series([] {
        std::vector<double> v(30);
        v[0] = 2.0;
        for (std::size_t t = 1; t < v.size(); ++t) v[t] = 0.5 * v[t - 1];
        return v;
    }());
    const auto seq = prefix_lad_ar(noiseless, 1);
    CHECK(seq.first_valid() == 11);
    for (std::size_t t = 11; t <= noiseless.size(); ++t) CHECK(seq.scalar_at(t) == doctest::Approx(0.5).epsilon(1e-8));

    RngStream rng(17, 0);
    const auto m7 = generate(ModelSpec::arma(7), 600, rng);
    const Vector fit = prefix_lad_ar(m7, 2).final_estimate();
    CHECK(std::abs(fit[0] - 0.6) < 0.1);
    CHECK(std::abs(fit[1] - 0.35) < 0.1);
}

TEST_CASE("LAD on n = 12 matches an exhaustive grid search") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto ts = noise(12, seed);
        const double fit = estimate(ts, EstimatorSpec::lad_ar(1))[0];
        const double grid = oracle::lad_ar1_grid(ts.values());
        if (std::abs(grid) < 0.9999) {
            // The objective is piecewise linear; a flat segment makes any point on it optimal.
            const Vector g = Vector::Constant(1, grid);
            const Vector f = Vector::Constant(1, fit);
            CHECK(lad_objective(ts.values(), f, 12) <= lad_objective(ts.values(), g, 12) + 1e-9);
            CHECK(std::abs(fit - grid) < 2e-4);
        }
    }
}

TEST_CASE("every prefix sequence ends at the single-shot estimate") {
    RngStream rng(23, 0);
    const auto ts = generate(ModelSpec::arma(1), 180, rng);
    for (const auto& spec : all_specs()) {
        CAPTURE(spec.to_string());
        const Vector last = prefix_estimates(ts, spec).final_estimate();
        const Vector direct = estimate(ts, spec);
        REQUIRE(last.size() == direct.size());
        for (Eigen::Index i = 0; i < last.size(); ++i) CHECK(std::abs(last[i] - direct[i]) <= 1e-10 * (1 + std::abs(direct[i])));
    }
}

TEST_CASE("location and scale equivariance") {
    RngStream rng(29, 0);
    const auto ts = generate(ModelSpec::arma(4), 160, rng);
    std::vector<double> shifted(ts.size()), scaled(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        shifted[i] = ts[i] + 3.25;
        scaled[i] = 2.5 * ts[i];
    }
    const TimeSeries sh(shifted), sc(scaled);

    for (const auto& spec : {EstimatorSpec::mean(), EstimatorSpec::median()}) {
        const auto a = prefix_estimates(ts, spec), b = prefix_estimates(sh, spec);
        for (std::size_t i = 0; i < a.flat().size(); ++i) CHECK(b.flat()[i] - a.flat()[i] == doctest::Approx(3.25).epsilon(1e-12));
    }
    for (const auto& spec : all_specs()) {
        using K = EstimatorSpec::Kind;
        if (spec.kind == K::Mean || spec.kind == K::Median || spec.kind == K::LadAr) continue;
        CAPTURE(spec.to_string());
        const auto a = prefix_estimates(ts, spec), b = prefix_estimates(sh, spec);
        for (std::size_t i = 0; i < a.flat().size(); ++i) CHECK(std::abs(a.flat()[i] - b.flat()[i]) < 1e-10);
    }
    for (const auto& spec : {EstimatorSpec::autocorr(1), EstimatorSpec::autocorr(3),
                             EstimatorSpec::spectral_ratio(PhiSpec::indicator(pi / 3))}) {
        CAPTURE(spec.to_string());
        const auto a = prefix_estimates(ts, spec), b = prefix_estimates(sc, spec);
        for (std::size_t i = 0; i < a.flat().size(); ++i) CHECK(std::abs(a.flat()[i] - b.flat()[i]) < 1e-10);
    }
}

TEST_CASE("EstimatorSpec parsing") {
    CHECK(EstimatorSpec::parse("mean") == EstimatorSpec::mean());
    CHECK(EstimatorSpec::parse("acf:2") == EstimatorSpec::autocorr(2));
    CHECK(EstimatorSpec::parse("acov:1") == EstimatorSpec::autocov(1));
    CHECK(EstimatorSpec::parse("acovt:1") == EstimatorSpec::autocov(1, AutocovDivisor::NMinusLag));
    CHECK(EstimatorSpec::parse("specratio:pi/2") == EstimatorSpec::spectral_ratio(PhiSpec::indicator(pi / 2)));
    CHECK(EstimatorSpec::parse("specmean:cos:2") == EstimatorSpec::spectral_mean(PhiSpec::cosine(2)));
    CHECK(EstimatorSpec::parse("ladar:2") == EstimatorSpec::lad_ar(2));
    for (const auto& spec : all_specs()) CHECK(EstimatorSpec::parse(spec.to_string()) == spec);
    CHECK_THROWS_AS((void)EstimatorSpec::parse("variance"), Error);
    CHECK_THROWS_AS((void)EstimatorSpec::parse("acf:"), Error);
}

TEST_CASE("RunningMedian") {
    RunningMedian rm;
    for (double v : {5.0, 1.0, 4.0, 2.0}) rm.push(v);
    CHECK(rm.median() == 3.0);
    rm.push(3.0);
    CHECK(rm.median() == 3.0);
}
