#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "selfnorm/core.hpp"
#include "selfnorm/critvals.hpp"
#include "selfnorm/self_normalized.hpp"

namespace selfnorm {

/// Tests of H0: gamma(1) = ... = gamma(K) = 0.
///   SnRecursive   recursive autocovariances c_t from the first t+K
///                 observations, normalised like W_N; referenced to U_K.
///   Lobato        CUSUM of the lag products Z_kt; referenced to U_K.
///   NwStudentized Wald statistic for the first K autocorrelations with an
///                 AR(1)-prewhitened Bartlett long-run covariance; chi^2_K.
///                 The delta method is taken at rho = 0, so the covariance of
///                 the correlations is that of the lag products over gamma(0)^2.
enum class NoncorrMethod { SnRecursive, Lobato, NwStudentized };

[[nodiscard]] const char* to_string(NoncorrMethod method) noexcept;
/// "sn", "lobato" or "nw".
[[nodiscard]] NoncorrMethod parse_noncorr_method(std::string_view text);

struct NoncorrResult {
    std::size_t k = 1;
    double statistic = 0.0;
    double critval = 0.0;
    bool reject = false;
    NoncorrMethod method = NoncorrMethod::SnRecursive;
};

/// All three require n > K + 20 and K >= 1. N = n - K.
[[nodiscard]] double sn_noncorr_statistic(const TimeSeries& ts, std::size_t k);
[[nodiscard]] double lobato_statistic(const TimeSeries& ts, std::size_t k);
[[nodiscard]] double qtilde_statistic(const TimeSeries& ts, std::size_t k);
[[nodiscard]] double noncorr_statistic(const TimeSeries& ts, std::size_t k, NoncorrMethod method);

/// Critical value of `method` at level alpha: U_{K,alpha} from `source` for
/// the self-normalised tests, the chi^2_K quantile for NwStudentized.
[[nodiscard]] double noncorr_critval(NoncorrMethod method, std::size_t k, double alpha, CritvalSource& source);

[[nodiscard]] NoncorrResult noncorr_test(const TimeSeries& ts, std::size_t k, NoncorrMethod method, double alpha,
                                         CritvalSource& source);
[[nodiscard]] NoncorrResult sn_noncorr_test(const TimeSeries& ts, std::size_t k, double alpha, CritvalSource& source);
[[nodiscard]] NoncorrResult lobato_test(const TimeSeries& ts, std::size_t k, double alpha, CritvalSource& source);
[[nodiscard]] NoncorrResult qtilde_test(const TimeSeries& ts, std::size_t k, double alpha);

[[nodiscard]] std::string to_json(const NoncorrResult& result);

/// Newey-West (1994) automatic bandwidth with unit weights and lag truncation
/// floor(2 (n/100)^{2/9}). Returns 1 when the variance estimate s0 is not
/// positive. Throws TooShort below 20 observations.
[[nodiscard]] std::size_t nw_bandwidth(std::span<const double> series);
[[nodiscard]] std::size_t nw_truncation_lag(std::size_t n);

struct LrvEstimate {
    SquareMatrix matrix;
    std::size_t bandwidth = 1;
    std::string kernel = "bartlett";
    bool prewhitened = false;
};

/// Bartlett lag-window estimate sum_{|j|<l} (1 - |j|/l) Gamma_j of the rows of
/// `data` (time along rows), Gamma_j with divisor rows(). Rows are centred
/// at their column means first.
[[nodiscard]] SquareMatrix bartlett_lrv(const Eigen::MatrixXd& data, std::size_t bandwidth);

/// Long-run covariance of the products w_kt = x_t x_{t-k}, k = 1..K, after
/// per-component AR(1) prewhitening (|a| <= 0.97) and recolouring. The
/// bandwidth is chosen on the sum of the prewhitened residuals.
[[nodiscard]] LrvEstimate prewhitened_product_lrv(const TimeSeries& ts, std::size_t k);

enum class EfficientTarget { Gamma1, Rho1 };

struct EfficientCi {
    double estimate = 0.0;
    double variance = 0.0;  // asymptotic variance of sqrt(n)(estimate - truth)
    std::size_t bandwidth = 1;
    Interval interval;
};

/// Normal interval for gamma(1) or rho(1) with a Bartlett long-run variance of
/// (w_0t, w_1t) without prewhitening. The bandwidth is picked as in the Wald
/// test: nw_bandwidth on the summed AR(1) residuals of both columns. Requires n >= 50.
[[nodiscard]] EfficientCi efficient_ci(const TimeSeries& ts, EfficientTarget target, double level);

}  // namespace selfnorm
