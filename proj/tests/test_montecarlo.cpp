#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "selfnorm/critvals.hpp"
#include "selfnorm/montecarlo.hpp"

using namespace selfnorm;
using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelSpec kind(ModelSpec::Kind k) {
    ModelSpec m;
    m.kind = k;
    return m;
}

CritvalCache& cache() {
    static CritvalCache c(SELFNORM_TEST_CACHE_DIR);
    return c;
}

}  // namespace

TEST_CASE("Monte Carlo standard error") {
    CHECK(mc_standard_error_pct(50.0, 100) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(mc_standard_error_pct(5.0, 2000) == doctest::Approx(100.0 * std::sqrt(0.05 * 0.95 / 2000.0)).epsilon(1e-12));
    CHECK(mc_standard_error_pct(0.0, 10) == 0.0);
}

TEST_CASE("an infinite critical value never rejects and always covers") {
    TestExperimentConfig t;
    t.n = 60;
    t.replications = 100;
    t.ks = {1, 2};
    t.critval_override = kInf;
    const auto size = run_size_experiment(t, cache());
    CHECK(size.rows.size() == 3 * 2 * 2);
    for (const auto& row : size.rows) CHECK(row.value_pct == 0.0);

    CoverageConfig c;
    c.model = ModelSpec::arma(1);
    c.n = 80;
    c.replications = 100;
    c.targets = {EstimatorSpec::mean(), EstimatorSpec::lad_ar(1)};
    c.critval_override = kInf;
    const auto cov = run_coverage_experiment(c, cache());
    for (const auto& row : cov.rows) CHECK(row.value_pct == 100.0);
}

TEST_CASE("experiments are reproducible and independent of the worker count") {
    CoverageConfig c;
    c.model = ModelSpec::arma(2);
    c.n = 100;
    c.replications = 120;
    c.targets = {EstimatorSpec::autocorr(1), EstimatorSpec::median()};
    c.methods = {CiMethod::Sn, CiMethod::Efficient, CiMethod::MbbSn};
    c.block_lengths = {3};
    c.bootstrap_reps = 100;
    c.seed = 9;
    c.workers = 1;
    const auto a = run_coverage_experiment(c, cache());
    c.workers = 4;
    const auto b = run_coverage_experiment(c, cache());
    CHECK(a.to_csv() == b.to_csv());
    for (const auto& row : a.rows) {
        if (row.method == std::string("sn")) CHECK(row.empty == 0);
    }
    // efficient intervals exist for acf:1 only
    CHECK(a.find("acf:1", "efficient", 0.95) != nullptr);
    CHECK(a.find("median", "efficient", 0.95) == nullptr);
    CHECK(a.find("median", "mbb-sn", 0.90, 3) != nullptr);

    TestExperimentConfig t;
    t.model = kind(ModelSpec::Kind::Garch11);
    t.n = 80;
    t.replications = 150;
    t.ks = {1, 3};
    t.workers = 1;
    const auto s1 = run_size_experiment(t, cache());
    t.workers = 3;
    CHECK(s1.to_csv() == run_size_experiment(t, cache()).to_csv());
}

TEST_CASE("closed-form truths agree with independent formulas") {
    const auto half = PhiSpec::indicator(pi / 2);
    const double ratio = true_parameter(ModelSpec::arma(4), EstimatorSpec::spectral_ratio(half))->coeff(0);
    // MA(1) theta: F(pi/2) = (1 + theta^2)/4 + theta/pi, F(pi) = (1 + theta^2)/2.
    CHECK(true_parameter(ModelSpec::arma(4), EstimatorSpec::spectral_mean(half))->coeff(0) ==
          doctest::Approx(0.41 + 0.8 / pi).epsilon(1e-10));
    CHECK(ratio == doctest::Approx((0.41 + 0.8 / pi) / 0.82).epsilon(1e-10));

    // AR(1) with unit innovations: F(pi/2) / F(pi) = 1/2 + 2 arctan(rho) / pi.
    const double ar = true_parameter(ModelSpec::arma(1), EstimatorSpec::spectral_ratio(half))->coeff(0);
    CHECK(ar == doctest::Approx(0.5 + 2.0 * std::atan(0.7) / pi).epsilon(1e-6));
    const double ar5 =
        true_parameter(ModelSpec::ar1(0.5, ModelSpec::Innovation::Garch), EstimatorSpec::spectral_ratio(half))->coeff(0);
    CHECK(ar5 == doctest::Approx(0.5 + 2.0 * std::atan(0.5) / pi).epsilon(1e-8));

    CHECK(true_parameter(ModelSpec::arma(1), EstimatorSpec::autocorr(1))->coeff(0) == doctest::Approx(0.7));
    CHECK(true_parameter(ModelSpec::arma(7), EstimatorSpec::autocorr(1))->coeff(0) ==
          doctest::Approx(0.6 / 0.65).epsilon(1e-12));
    CHECK(true_parameter(ModelSpec::arma(5), EstimatorSpec::autocov(1))->coeff(0) == doctest::Approx(0.8));
    CHECK(true_parameter(kind(ModelSpec::Kind::DemeanedLogNormal), EstimatorSpec::median())->coeff(0) ==
          doctest::Approx(1.0 - std::exp(0.5)));
    const auto lad = true_parameter(ModelSpec::arma(8), EstimatorSpec::lad_ar(2));
    REQUIRE(lad);
    CHECK(lad->coeff(1) == 0.35);
    CHECK_FALSE(true_parameter(kind(ModelSpec::Kind::NonMds), EstimatorSpec::median()));

    // AR(2) gamma(0) against the Yule-Walker system solved directly.
    const double p1 = 0.6, p2 = 0.35;
    const double r1 = p1 / (1 - p2), r2 = p1 * r1 + p2;
    const double g0 = 1.0 / (1.0 - p1 * r1 - p2 * r2);
    CHECK(population_autocov(ModelSpec::arma(9), 0)->at(0) == doctest::Approx(g0).epsilon(1e-12));
}

TEST_CASE("size-adjusted power is near alpha at rho = 0 and grows with rho") {
    TestExperimentConfig t;
    t.n = 100;
    t.replications = 1000;
    t.methods = {NoncorrMethod::SnRecursive};
    t.alphas = {0.05};
    t.seed = 4;
    t.model = ModelSpec::ar1(0.0, ModelSpec::Innovation::Normal);
    const auto null = run_power_experiment(t, true, cache());
    // same seeds for the null and the alternative make this exact up to quantile interpolation
    CHECK(null.rows.at(0).value_pct == doctest::Approx(5.0).epsilon(0.1));
    double previous = null.rows.at(0).value_pct;
    for (double rho : {0.2, 0.4}) {
        t.model = ModelSpec::ar1(rho, ModelSpec::Innovation::Normal);
        const double p = run_power_experiment(t, true, cache()).rows.at(0).value_pct;
        CHECK(p > previous);
        previous = p;
    }
    t.model = ModelSpec::arma(1);
    CHECK_THROWS_AS((void)run_power_experiment(t, true, cache()), Error);
}

TEST_CASE("failures are counted, not hidden") {
    TestExperimentConfig t;
    t.n = 22;
    t.replications = 100;
    t.ks = {1, 5};
    t.methods = {NoncorrMethod::Lobato};
    const auto r = run_size_experiment(t, cache());
    const auto* k5 = r.find("K=5", "lobato", 0.05);
    REQUIRE(k5);
    CHECK(k5->failures == 100);
    CHECK(k5->trials == 0);
    CHECK(std::isnan(k5->value_pct));
    const auto* k1 = r.find("K=1", "lobato", 0.05);
    CHECK(k1->failures + k1->trials == 100);
    CHECK(k1->trials > 90);

    TestExperimentConfig bad;
    bad.replications = 99;
    CHECK_THROWS_AS((void)run_size_experiment(bad, cache()), Error);
    CoverageConfig cov;
    cov.model = kind(ModelSpec::Kind::Hetero12);
    cov.targets = {EstimatorSpec::autocov(0)};
    CHECK_THROWS_AS((void)run_coverage_experiment(cov, cache()), Error);
}

TEST_CASE("prewhitened Wald test: rough size under iid, not liberal under heteroscedasticity") {
    TestExperimentConfig t;
    t.n = 500;
    t.replications = 400;
    t.methods = {NoncorrMethod::NwStudentized};
    t.ks = {1, 5};
    t.alphas = {0.05};
    t.seed = 17;
    t.model = kind(ModelSpec::Kind::IidNormal);
    const auto iid = run_size_experiment(t, cache());
    const double r1 = iid.find("K=1", "nw", 0.05)->value_pct;
    CHECK(r1 >= 2.0);
    CHECK(r1 <= 10.0);
    t.model = kind(ModelSpec::Kind::Hetero12);
    const auto het = run_size_experiment(t, cache());
    // 5% nominal plus about three Monte Carlo standard errors at R = 400
    CHECK(het.find("K=5", "nw", 0.05)->value_pct < 8.0);
}

TEST_CASE("table presets") {
    const auto names = table_names();
    CHECK(names.size() == 14);
    const auto report = run_table("2a", 0.02, cache(), 1, 0);
    CHECK(report.rows.size() == 5 * 3 * 3 * 2);
    for (const auto& row : report.rows) CHECK(row.trials + row.failures == 100);
    const std::string csv = report.to_csv();
    CHECK(csv.rfind("model,n,target,method,level_or_alpha,value_pct,se_pct,mean_width,block_length,trials,failures,empty\n", 0) == 0);
    CHECK_THROWS_AS((void)run_table("9z", 1.0, cache(), 1, 0), Error);
    CHECK_THROWS_AS((void)run_table("1a", 0.0, cache(), 1, 0), Error);
}
