#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfnorm/core.hpp"
#include "selfnorm/critvals.hpp"
#include "selfnorm/dgp.hpp"
#include "selfnorm/estimators.hpp"
#include "selfnorm/noncorr.hpp"

namespace selfnorm {

/// One cell of an experiment grid. `value_pct` is a rejection or coverage
/// percentage over the `trials` replications that completed; `failures`
/// counts replications where the method raised an error.
struct ReportRow {
    std::string model;
    std::size_t n = 0;
    std::string target;
    std::string method;
    double level_or_alpha = 0.0;
    double value_pct = 0.0;
    double se_pct = 0.0;
    std::optional<double> mean_width;
    std::optional<std::size_t> block_length;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t empty = 0;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    void append(const ExperimentReport& other);
    /// First row matching every given field; nullptr if none.
    [[nodiscard]] const ReportRow* find(std::string_view target, std::string_view method, double level_or_alpha,
                                        std::optional<std::size_t> block_length = std::nullopt) const;
    [[nodiscard]] std::string to_csv() const;
};

/// 100 * sqrt(p(1-p)/R) for a percentage p.
[[nodiscard]] double mc_standard_error_pct(double value_pct, std::size_t replications);

/// Size or power study for the non-correlation tests. Replication r draws
/// its series from stream (seed, stream_index(experiment, r)).
struct TestExperimentConfig {
    ModelSpec model;
    std::size_t n = 100;
    std::size_t replications = 1000;
    std::vector<NoncorrMethod> methods{NoncorrMethod::Lobato, NoncorrMethod::SnRecursive,
                                       NoncorrMethod::NwStudentized};
    std::vector<std::size_t> ks{1};
    std::vector<double> alphas{0.05, 0.10};
    std::uint64_t seed = 1;
    std::uint64_t experiment = 0;
    unsigned workers = 0;
    /// Replaces every critical value, e.g. +infinity to never reject.
    std::optional<double> critval_override;
};

[[nodiscard]] ExperimentReport run_size_experiment(const TestExperimentConfig& cfg, CritvalSource& source);

/// With size_adjust, the critical value of each (method, K, alpha) cell is the
/// empirical 1-alpha quantile of the statistic under `null_model`, simulated
/// with the same seeds as the alternative. When `null_model` is absent an
/// Ar1 alternative uses Ar1 with rho = 0 and the same innovation.
[[nodiscard]] ExperimentReport run_power_experiment(const TestExperimentConfig& cfg, bool size_adjust,
                                                    CritvalSource& source,
                                                    std::optional<ModelSpec> null_model = std::nullopt);

enum class CiMethod { Sn, Efficient, MbbPercentile, MbbNormal, MbbSn };

[[nodiscard]] const char* to_string(CiMethod method) noexcept;
/// "sn", "efficient", "mbb-pct", "mbb-normal", "mbb-sn".
[[nodiscard]] CiMethod parse_ci_method(std::string_view text);

/// Coverage study. Efficient intervals apply only to acov:1 and acf:1;
/// percentile and normal bootstrap intervals only to scalar targets.
struct CoverageConfig {
    ModelSpec model;
    std::size_t n = 150;
    std::size_t replications = 1000;
    std::vector<EstimatorSpec> targets{EstimatorSpec::autocorr(1)};
    std::vector<CiMethod> methods{CiMethod::Sn};
    std::vector<double> levels{0.90, 0.95};
    std::vector<std::size_t> block_lengths{};  // bootstrap methods only
    std::size_t bootstrap_reps = 1000;
    std::uint64_t seed = 1;
    std::uint64_t experiment = 0;
    unsigned workers = 0;
    std::optional<double> critval_override;
    /// Truth for every target; by default true_parameter() is used.
    std::optional<Vector> truth;
};

[[nodiscard]] ExperimentReport run_coverage_experiment(const CoverageConfig& cfg, CritvalSource& source);

/// Population value of the target under the model where it has a closed
/// form; std::nullopt otherwise.
[[nodiscard]] std::optional<Vector> true_parameter(const ModelSpec& model, const EstimatorSpec& spec);

/// Population autocovariances gamma(0..k_max) for the stationary models with
/// a known second-order structure.
[[nodiscard]] std::optional<std::vector<double>> population_autocov(const ModelSpec& model, std::size_t k_max);

/// Experiment presets mirroring the published tables and figures: 1a 1b 2a
/// 2b 3a 3b 4a 4b 5a 5b fig1 fig2 fig3 fig4. `scale` multiplies the published
/// replication counts (at least 100 replications are kept).
[[nodiscard]] std::vector<std::string> table_names();
[[nodiscard]] ExperimentReport run_table(std::string_view name, double scale, CritvalSource& source,
                                         std::uint64_t seed, unsigned workers);

}  // namespace selfnorm
