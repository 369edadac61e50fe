#include <algorithm>
#include <cmath>
#include <numbers>

#include "selfnorm/montecarlo.hpp"

namespace selfnorm {

namespace {

std::size_t scaled(std::size_t published, double scale) {
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
    const auto r = static_cast<std::size_t>(std::llround(static_cast<double>(published) * scale));
    return std::max<std::size_t>(r, 100);
}

const std::vector<std::string>& size_models() {
    static const std::vector<std::string> names{"iidn", "t6", "lognorm", "onedep", "hetero", "nonmds", "garch",
                                                "bilinear"};
    return names;
}

ExperimentReport size_table(std::size_t n, double scale, CritvalSource& source, std::uint64_t seed,
                            unsigned workers) {
    ExperimentReport report;
    std::uint64_t experiment = 0;
    for (const auto& name : size_models()) {
        TestExperimentConfig cfg;
        cfg.model = ModelSpec::parse(name);
        cfg.n = n;
        cfg.replications = scaled(5000, scale);
        cfg.ks = {1, 3, 5};
        cfg.alphas = {0.05, 0.10};
        cfg.seed = seed;
        cfg.experiment = experiment++;
        cfg.workers = workers;
        report.append(run_size_experiment(cfg, source));
    }
    return report;
}

ExperimentReport power_table(ModelSpec::Innovation innovation, double scale, CritvalSource& source,
                             std::uint64_t seed, unsigned workers) {
    ExperimentReport report;
    std::uint64_t experiment = 0;
    for (double rho : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        TestExperimentConfig cfg;
        cfg.model = ModelSpec::ar1(rho, innovation);
        cfg.n = 100;
        cfg.replications = scaled(5000, scale);
        cfg.ks = {1, 3, 5};
        cfg.alphas = {0.05, 0.10};
        cfg.seed = seed;
        cfg.experiment = experiment++;
        cfg.workers = workers;
        report.append(run_power_experiment(cfg, true, source));
    }
    return report;
}

ExperimentReport coverage_table(const std::vector<int>& models, const std::vector<EstimatorSpec>& targets,
                                std::vector<CiMethod> methods, std::size_t published_reps, double scale,
                                CritvalSource& source, std::uint64_t seed, unsigned workers) {
    ExperimentReport report;
    std::uint64_t experiment = 0;
    for (int m : models) {
        for (std::size_t n : {150, 600}) {
            CoverageConfig cfg;
            cfg.model = ModelSpec::arma(m);
            cfg.n = n;
            cfg.replications = scaled(published_reps, scale);
            cfg.targets = targets;
            cfg.methods = methods;
            cfg.levels = {0.90, 0.95};
            cfg.seed = seed;
            cfg.experiment = experiment++;
            cfg.workers = workers;
            report.append(run_coverage_experiment(cfg, source));
        }
    }
    return report;
}

ExperimentReport figure(const EstimatorSpec& target, std::size_t published_reps, double scale,
                        CritvalSource& source, std::uint64_t seed, unsigned workers) {
    ExperimentReport report;
    std::uint64_t experiment = 0;
    for (double rho : {0.0, 0.5, 0.8}) {
        CoverageConfig cfg;
        cfg.model = ModelSpec::ar1(rho, ModelSpec::Innovation::Normal);
        cfg.n = 50;
        cfg.replications = scaled(published_reps, scale);
        cfg.targets = {target};
        cfg.methods = {CiMethod::MbbPercentile, CiMethod::MbbNormal, CiMethod::MbbSn, CiMethod::Sn};
        cfg.levels = {0.95};
        for (std::size_t l = 1; l <= 15; ++l) cfg.block_lengths.push_back(l);
        cfg.bootstrap_reps = 1000;
        cfg.seed = seed;
        cfg.experiment = experiment++;
        cfg.workers = workers;
        report.append(run_coverage_experiment(cfg, source));
    }
    return report;
}

}  // namespace

std::vector<std::string> table_names() {
    return {"1a", "1b", "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "fig1", "fig2", "fig3", "fig4"};
}

ExperimentReport run_table(std::string_view name, double scale, CritvalSource& source, std::uint64_t seed,
                           unsigned workers) {
    const auto half_pi = PhiSpec::indicator(std::numbers::pi / 2.0);
    const std::vector<int> m1_m6{1, 2, 3, 4, 5, 6};
    if (name == "1a") return size_table(100, scale, source, seed, workers);
    if (name == "1b") return size_table(500, scale, source, seed, workers);
    if (name == "2a") return power_table(ModelSpec::Innovation::Garch, scale, source, seed, workers);
    if (name == "2b") return power_table(ModelSpec::Innovation::Bilinear, scale, source, seed, workers);
    if (name == "3a") {
        return coverage_table(m1_m6, {EstimatorSpec::autocov(1)}, {CiMethod::Sn, CiMethod::Efficient}, 1000, scale,
                              source, seed, workers);
    }
    if (name == "3b") {
        return coverage_table(m1_m6, {EstimatorSpec::spectral_mean(half_pi)}, {CiMethod::Sn}, 1000, scale, source,
                              seed, workers);
    }
    if (name == "4a") {
        return coverage_table(m1_m6, {EstimatorSpec::autocorr(1)}, {CiMethod::Sn, CiMethod::Efficient}, 1000, scale,
                              source, seed, workers);
    }
    if (name == "4b") {
        return coverage_table(m1_m6, {EstimatorSpec::spectral_ratio(half_pi)}, {CiMethod::Sn}, 1000, scale, source,
                              seed, workers);
    }
    if (name == "5a") {
        return coverage_table(m1_m6, {EstimatorSpec::median()}, {CiMethod::Sn}, 10000, scale, source, seed, workers);
    }
    if (name == "5b") {
        auto report = coverage_table({1, 2, 3}, {EstimatorSpec::lad_ar(1)}, {CiMethod::Sn}, 1000, scale, source, seed,
                                     workers);
        report.append(coverage_table({7, 8, 9}, {EstimatorSpec::lad_ar(2)}, {CiMethod::Sn}, 1000, scale, source,
                                     seed + 1, workers));
        return report;
    }
    if (name == "fig1") return figure(EstimatorSpec::mean(), 2000, scale, source, seed, workers);
    if (name == "fig2") return figure(EstimatorSpec::median(), 2000, scale, source, seed, workers);
    if (name == "fig3") return figure(EstimatorSpec::autocorr(1), 2000, scale, source, seed, workers);
    if (name == "fig4") return figure(EstimatorSpec::spectral_ratio(half_pi), 500, scale, source, seed, workers);
    throw Error(ErrorKind::InvalidArgument, "unknown table '" + std::string(name) + "'");
}

}  // namespace selfnorm
