#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "selfnorm/core.hpp"

namespace selfnorm {

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] double width() const noexcept { return upper - lower; }
    [[nodiscard]] bool contains(double theta) const noexcept { return lower <= theta && theta <= upper; }
    [[nodiscard]] bool empty() const noexcept { return !(lower <= upper); }
};

/// {theta : (theta - center)' shape^{-1} (theta - center) <= radius2}.
struct Ellipsoid {
    Vector center;
    SquareMatrix shape;
    double radius2 = 0.0;

    [[nodiscard]] bool contains(const Vector& theta) const;
};

struct SelfNormResult {
    Vector theta_hat;
    SquareMatrix w_matrix;
    std::size_t n_eff = 0;
    double level = 0.0;
    double critval = 0.0;
    std::optional<Interval> interval;  // set when q = 1
    Ellipsoid region;
};

/// W_N = N^{-2} sum_t t^2 (theta_t - theta_N)(theta_t - theta_N)', summed over
/// the valid prefixes, with N the raw sample size behind theta_N.
[[nodiscard]] SquareMatrix wn_matrix(const EstimateSequence& seq);

/// N (theta_N - theta0)' W_N^{-1} (theta_N - theta0).
[[nodiscard]] double sn_pivot(const EstimateSequence& seq, const Vector& theta0);
[[nodiscard]] double sn_pivot(const EstimateSequence& seq, const SquareMatrix& w, const Vector& theta0);

/// Scalar interval theta_N -/+ sqrt(critval * W_N / N). An infinite critval
/// yields the whole real line.
[[nodiscard]] SelfNormResult sn_interval(const EstimateSequence& seq, double level, double critval);

/// Confidence ellipsoid for any q; also fills `interval` when q = 1.
[[nodiscard]] SelfNormResult sn_region(const EstimateSequence& seq, double level, double critval);

/// One JSON line: estimate, L, U (q = 1) or shape (q > 1), level, critval, N.
[[nodiscard]] std::string to_json(const SelfNormResult& result);

}  // namespace selfnorm
