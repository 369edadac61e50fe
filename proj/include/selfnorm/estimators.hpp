#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "selfnorm/core.hpp"

namespace selfnorm {

/// Weight function phi on [0, pi] for spectral means: either 2cos(m*lambda)
/// or the indicator of [0, x].
struct PhiSpec {
    enum class Kind { Cosine, Indicator };

    Kind kind = Kind::Indicator;
    std::size_t m = 0;
    double x = 0.0;

    static PhiSpec cosine(std::size_t m);
    /// Throws InvalidArgument unless 0 <= x <= pi.
    static PhiSpec indicator(double x);

    friend bool operator==(const PhiSpec&, const PhiSpec&) = default;
};

/// Coefficients g_k with G(I_n, phi) = sum_k gamma_hat(k) g_k.
struct FourierCoeffs {
    std::vector<double> g;
};

[[nodiscard]] FourierCoeffs fourier_coeffs(const PhiSpec& phi, std::size_t k_max);

enum class AutocovDivisor { FullN, NMinusLag };

struct EstimatorSpec {
    enum class Kind { Mean, Median, AutoCov, AutoCorr, SpectralMean, SpectralRatio, LadAr };

    Kind kind = Kind::Mean;
    std::size_t lag = 0;
    AutocovDivisor divisor = AutocovDivisor::FullN;
    PhiSpec phi{};
    std::size_t order = 1;

    static EstimatorSpec mean() { return {Kind::Mean}; }
    static EstimatorSpec median() { return {Kind::Median}; }
    static EstimatorSpec autocov(std::size_t lag, AutocovDivisor divisor = AutocovDivisor::FullN);
    static EstimatorSpec autocorr(std::size_t lag);
    static EstimatorSpec spectral_mean(const PhiSpec& phi);
    static EstimatorSpec spectral_ratio(const PhiSpec& phi);
    static EstimatorSpec lad_ar(std::size_t order);

    /// Parses "mean", "median", "acov:k", "acovt:k" (divisor n-k), "acf:k",
    /// "specmean:x", "specratio:x", "ladar:p". Frequencies accept "pi",
    /// "pi/2" style fractions or plain numbers; "cos:m" selects 2cos(m*lambda).
    static EstimatorSpec parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;

    /// Dimension q of the estimate.
    [[nodiscard]] std::size_t dim() const noexcept { return kind == Kind::LadAr ? order : 1; }

    friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

[[nodiscard]] EstimateSequence prefix_mean(const TimeSeries& ts);
[[nodiscard]] EstimateSequence prefix_median(const TimeSeries& ts);
[[nodiscard]] EstimateSequence prefix_autocov(const TimeSeries& ts, std::size_t lag,
                                              AutocovDivisor divisor = AutocovDivisor::FullN);
[[nodiscard]] EstimateSequence prefix_autocorr(const TimeSeries& ts, std::size_t lag);
[[nodiscard]] EstimateSequence prefix_spectral_mean(const TimeSeries& ts, const PhiSpec& phi);
[[nodiscard]] EstimateSequence prefix_spectral_ratio(const TimeSeries& ts, const PhiSpec& phi);
[[nodiscard]] EstimateSequence prefix_lad_ar(const TimeSeries& ts, std::size_t order);

[[nodiscard]] EstimateSequence prefix_estimates(const TimeSeries& ts, const EstimatorSpec& spec);

/// Full-sample estimate only, without the prefix recursion.
[[nodiscard]] Vector estimate(const TimeSeries& ts, const EstimatorSpec& spec);

/// Streaming median over a growing sample: two heaps, O(log n) per insert.
class RunningMedian {
public:
    void push(double x);
    [[nodiscard]] double median() const;
    [[nodiscard]] std::size_t size() const noexcept { return low_.size() + high_.size(); }
    void reserve(std::size_t n);

private:
    std::vector<double> low_;   // max-heap
    std::vector<double> high_;  // min-heap
};

/// Least absolute deviation fit of x_s on (x_{s-1}, ..., x_{s-p}) over
/// s = p+1..end (1-based, inclusive).
struct LadFit {
    Vector coef;
    std::size_t iterations = 0;
    bool used_fallback = false;
};

/// IRLS with residual floor 1e-8 and tolerance 1e-9 on the parameter change,
/// at most 200 iterations; falls back to coordinate descent over residual
/// breakpoints. Throws SolverFailed(end) if neither converges.
[[nodiscard]] LadFit lad_ar_fit(std::span<const double> x, std::size_t order, std::size_t end,
                                const Vector* warm_start = nullptr);

/// Objective sum_s |x_s - sum_j coef_j x_{s-j}| over s = p+1..end.
[[nodiscard]] double lad_objective(std::span<const double> x, const Vector& coef, std::size_t end);

}  // namespace selfnorm
