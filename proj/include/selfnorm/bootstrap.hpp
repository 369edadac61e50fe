#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "selfnorm/core.hpp"
#include "selfnorm/estimators.hpp"
#include "selfnorm/self_normalized.hpp"

namespace selfnorm {

struct MbbConfig {
    std::size_t block_length = 1;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// Moving block bootstrap sample: ceil(n/l) starts drawn uniformly from
/// 1..n-l+1, blocks concatenated and cut to length n. Throws BlockTooLong
/// unless 1 <= l <= n.
[[nodiscard]] TimeSeries mbb_resample(const TimeSeries& ts, std::size_t block_length, RngStream& rng);

/// The same construction from explicit 1-based block starts.
[[nodiscard]] std::vector<double> mbb_from_starts(std::span<const double> x, std::size_t block_length,
                                                  std::span<const std::size_t> starts);

/// Scheme (1): percentile interval from sqrt(N)(theta* - theta_N).
[[nodiscard]] Interval mbb_percentile_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg,
                                         double level);
/// Scheme (2): normal interval with the bootstrap variance of sqrt(N)(theta* - theta_N).
[[nodiscard]] Interval mbb_variance_normal_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg,
                                              double level);
/// Scheme (3): self-normalised region whose critical value is the `level`
/// quantile of the bootstrapped pivot N(theta* - theta_N)' W*^{-1} (theta* - theta_N).
[[nodiscard]] SelfNormResult mbb_sn_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg,
                                       double level);

struct MbbSchemes {
    bool percentile = true;
    bool normal = true;
    bool sn = true;
};

struct MbbResult {
    std::optional<Interval> percentile;
    std::optional<Interval> normal;
    std::optional<SelfNormResult> sn;
    double sigma2 = 0.0;         // scheme (2) variance
    double sn_critval = 0.0;     // U*
    std::size_t redraws = 0;     // resamples redrawn after an estimator or W* failure
    std::size_t skipped = 0;     // resamples with no usable pivot after 5 redraws
    std::vector<double> roots;   // sorted sqrt(N)(theta* - theta_N), scalar schemes
    std::vector<double> pivots;  // sorted bootstrap pivots, scheme (3)
};

/// Runs the requested schemes on one shared set of B resamples. Resample b
/// draws from stream (cfg.seed, b), so results do not depend on cfg.workers.
/// An estimator failure redraws the resample up to 5 times and then
/// propagates. For scheme (3) a singular W* redraws up to 5 times and then
/// skips; more than 5% skipped throws TooManyDegenerateResamples.
[[nodiscard]] MbbResult mbb_all_schemes(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg,
                                        double level, MbbSchemes schemes = {});

}  // namespace selfnorm
