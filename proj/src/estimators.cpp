#include "selfnorm/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace selfnorm {

namespace {

constexpr double kDegenerateVariance = 1e-14;

// Autocovariances are shift invariant; centring on the full-sample mean
// keeps the raw-product sums well conditioned.
std::vector<double> centred(std::span<const double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - mean;
    return y;
}

// Running sums needed for mean-corrected prefix autocovariances:
// products[k] = sum_{s=1}^{t-k} y_s y_{s+k}, cumsum[t] = sum_{s<=t} y_s.
class PrefixCovariance {
public:
    PrefixCovariance(std::span<const double> y, std::vector<std::size_t> lags)
        : y_(y), lags_(std::move(lags)), products_(lags_.size(), 0.0), cumsum_(y.size() + 1, 0.0) {
        for (std::size_t i = 0; i < y.size(); ++i) cumsum_[i + 1] = cumsum_[i] + y[i];
    }

    // Advance to prefix length t (called with t = 1, 2, ... in order).
    void advance(std::size_t t) {
        const double yt = y_[t - 1];
        for (std::size_t j = 0; j < lags_.size(); ++j) {
            const std::size_t k = lags_[j];
            if (t > k) products_[j] += y_[t - 1 - k] * yt;
        }
        t_ = t;
    }

    // Sum_{s=1}^{t-k} (y_s - ybar_t)(y_{s+k} - ybar_t) for the j-th lag.
    [[nodiscard]] double centred_sum(std::size_t j) const {
        const std::size_t k = lags_[j];
        if (k >= t_) return 0.0;
        const double mean = cumsum_[t_] / static_cast<double>(t_);
        const double head = cumsum_[t_ - k];
        const double tail = cumsum_[t_] - cumsum_[k];
        return products_[j] - mean * (head + tail) + static_cast<double>(t_ - k) * mean * mean;
    }

    [[nodiscard]] std::size_t lag(std::size_t j) const { return lags_[j]; }
    [[nodiscard]] std::size_t lag_count() const { return lags_.size(); }

private:
    std::span<const double> y_;
    std::vector<std::size_t> lags_;
    std::vector<double> products_;
    std::vector<double> cumsum_;
    std::size_t t_ = 0;
};

double parse_frequency(std::string_view text) {
    auto parse_number = [&](std::string_view s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw Error(ErrorKind::Parse, "cannot parse frequency '" + std::string(text) + "'");
        }
        return v;
    };
    const auto pi_pos = text.find("pi");
    if (pi_pos == std::string_view::npos) return parse_number(text);
    double factor = 1.0;
    if (pi_pos > 0) {
        auto head = text.substr(0, pi_pos);
        if (head.back() == '*') head.remove_suffix(1);
        factor = parse_number(head);
    }
    auto rest = text.substr(pi_pos + 2);
    if (!rest.empty()) {
        if (rest.front() != '/') throw Error(ErrorKind::Parse, "cannot parse frequency '" + std::string(text) + "'");
        factor /= parse_number(rest.substr(1));
    }
    return factor * std::numbers::pi;
}

std::size_t parse_count(std::string_view s, std::string_view whole) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorKind::Parse, "cannot parse integer in '" + std::string(whole) + "'");
    }
    return v;
}

std::string format_frequency(double x) {
    for (int den : {1, 2, 3, 4, 6, 8}) {
        for (int num = 1; num <= den; ++num) {
            if (x == num * std::numbers::pi / den) {
                std::string s = (num == 1 ? "" : std::to_string(num)) + "pi";
                if (den != 1) s += "/" + std::to_string(den);
                return s;
            }
        }
    }
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

PhiSpec parse_phi(std::string_view arg, std::string_view whole) {
    if (arg.starts_with("cos:")) return PhiSpec::cosine(parse_count(arg.substr(4), whole));
    return PhiSpec::indicator(parse_frequency(arg));
}

std::string format_phi(const PhiSpec& phi) {
    if (phi.kind == PhiSpec::Kind::Cosine) return "cos:" + std::to_string(phi.m);
    return format_frequency(phi.x);
}

}  // namespace

PhiSpec PhiSpec::cosine(std::size_t m) {
    return PhiSpec{Kind::Cosine, m, 0.0};
}

PhiSpec PhiSpec::indicator(double x) {
    if (!(x >= 0.0 && x <= std::numbers::pi)) {
        throw Error(ErrorKind::InvalidArgument, "indicator frequency must lie in [0, pi]");
    }
    return PhiSpec{Kind::Indicator, 0, x};
}

FourierCoeffs fourier_coeffs(const PhiSpec& phi, std::size_t k_max) {
    FourierCoeffs out;
    out.g.assign(k_max + 1, 0.0);
    if (phi.kind == PhiSpec::Kind::Cosine) {
        if (phi.m <= k_max) out.g[phi.m] = 1.0;
        return out;
    }
    out.g[0] = phi.x / (2.0 * std::numbers::pi);
    // sin(k*pi) is exactly zero; evaluating it in floating point is not.
    if (phi.x == std::numbers::pi || phi.x == 0.0) return out;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double kd = static_cast<double>(k);
        out.g[k] = std::sin(kd * phi.x) / (std::numbers::pi * kd);
    }
    return out;
}

EstimatorSpec EstimatorSpec::autocov(std::size_t lag, AutocovDivisor divisor) {
    EstimatorSpec s{Kind::AutoCov};
    s.lag = lag;
    s.divisor = divisor;
    return s;
}

EstimatorSpec EstimatorSpec::autocorr(std::size_t lag) {
    if (lag == 0) throw Error(ErrorKind::InvalidArgument, "autocorrelation lag must be at least 1");
    EstimatorSpec s{Kind::AutoCorr};
    s.lag = lag;
    return s;
}

EstimatorSpec EstimatorSpec::spectral_mean(const PhiSpec& phi) {
    EstimatorSpec s{Kind::SpectralMean};
    s.phi = phi;
    return s;
}

EstimatorSpec EstimatorSpec::spectral_ratio(const PhiSpec& phi) {
    EstimatorSpec s{Kind::SpectralRatio};
    s.phi = phi;
    return s;
}

EstimatorSpec EstimatorSpec::lad_ar(std::size_t order) {
    if (order == 0) throw Error(ErrorKind::InvalidArgument, "LAD autoregression order must be at least 1");
    EstimatorSpec s{Kind::LadAr};
    s.order = order;
    return s;
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const auto arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    auto need_arg = [&] {
        if (arg.empty()) throw Error(ErrorKind::Parse, "estimator '" + std::string(text) + "' needs an argument");
    };
    if (head == "mean" && arg.empty()) return mean();
    if (head == "median" && arg.empty()) return median();
    if (head == "acov") { need_arg(); return autocov(parse_count(arg, text)); }
    if (head == "acovt") { need_arg(); return autocov(parse_count(arg, text), AutocovDivisor::NMinusLag); }
    if (head == "acf") { need_arg(); return autocorr(parse_count(arg, text)); }
    if (head == "specmean") { need_arg(); return spectral_mean(parse_phi(arg, text)); }
    if (head == "specratio") { need_arg(); return spectral_ratio(parse_phi(arg, text)); }
    if (head == "ladar") { need_arg(); return lad_ar(parse_count(arg, text)); }
    throw Error(ErrorKind::Parse, "unknown estimator '" + std::string(text) + "'");
}

std::string EstimatorSpec::to_string() const {
    switch (kind) {
        case Kind::Mean: return "mean";
        case Kind::Median: return "median";
        case Kind::AutoCov:
            return (divisor == AutocovDivisor::FullN ? "acov:" : "acovt:") + std::to_string(lag);
        case Kind::AutoCorr: return "acf:" + std::to_string(lag);
        case Kind::SpectralMean: return "specmean:" + format_phi(phi);
        case Kind::SpectralRatio: return "specratio:" + format_phi(phi);
        case Kind::LadAr: return "ladar:" + std::to_string(order);
    }
    return "unknown";
}

EstimateSequence prefix_mean(const TimeSeries& ts) {
    const auto x = ts.values();
    std::vector<double> out(x.size());
    double sum = 0.0;
    for (std::size_t t = 1; t <= x.size(); ++t) {
        sum += x[t - 1];
        out[t - 1] = sum / static_cast<double>(t);
    }
    return EstimateSequence(1, x.size(), 1, std::move(out));
}

void RunningMedian::reserve(std::size_t n) {
    low_.reserve(n / 2 + 1);
    high_.reserve(n / 2 + 1);
}

void RunningMedian::push(double x) {
    if (low_.empty() || x <= low_.front()) {
        low_.push_back(x);
        std::push_heap(low_.begin(), low_.end());
    } else {
        high_.push_back(x);
        std::push_heap(high_.begin(), high_.end(), std::greater<>{});
    }
    if (low_.size() > high_.size() + 1) {
        std::pop_heap(low_.begin(), low_.end());
        high_.push_back(low_.back());
        low_.pop_back();
        std::push_heap(high_.begin(), high_.end(), std::greater<>{});
    } else if (high_.size() > low_.size()) {
        std::pop_heap(high_.begin(), high_.end(), std::greater<>{});
        low_.push_back(high_.back());
        high_.pop_back();
        std::push_heap(low_.begin(), low_.end());
    }
}

double RunningMedian::median() const {
    if (low_.empty()) throw Error(ErrorKind::InvalidArgument, "median of empty sample");
    if (low_.size() > high_.size()) return low_.front();
    return 0.5 * (low_.front() + high_.front());
}

EstimateSequence prefix_median(const TimeSeries& ts) {
    const auto x = ts.values();
    std::vector<double> out(x.size());
    RunningMedian rm;
    rm.reserve(x.size());
    for (std::size_t t = 1; t <= x.size(); ++t) {
        rm.push(x[t - 1]);
        out[t - 1] = rm.median();
    }
    return EstimateSequence(1, x.size(), 1, std::move(out));
}

EstimateSequence prefix_autocov(const TimeSeries& ts, std::size_t lag, AutocovDivisor divisor) {
    const std::size_t n = ts.size();
    if (lag + 2 > n) {
        throw Error(ErrorKind::LagTooLarge, "lag " + std::to_string(lag) + " too large for n = " + std::to_string(n));
    }
    const auto y = centred(ts.values());
    PrefixCovariance acc(y, {lag});
    std::vector<double> out;
    out.reserve(n - lag - 1);
    for (std::size_t t = 1; t <= n; ++t) {
        acc.advance(t);
        if (t < lag + 2) continue;
        const double denom = static_cast<double>(divisor == AutocovDivisor::FullN ? t : t - lag);
        out.push_back(acc.centred_sum(0) / denom);
    }
    return EstimateSequence(1, n, lag + 2, std::move(out));
}

EstimateSequence prefix_autocorr(const TimeSeries& ts, std::size_t lag) {
    const std::size_t n = ts.size();
    if (lag == 0) throw Error(ErrorKind::InvalidArgument, "autocorrelation lag must be at least 1");
    if (lag + 2 > n) {
        throw Error(ErrorKind::LagTooLarge, "lag " + std::to_string(lag) + " too large for n = " + std::to_string(n));
    }
    const auto y = centred(ts.values());
    PrefixCovariance acc(y, {0, lag});
    std::vector<double> out;
    out.reserve(n - lag - 1);
    for (std::size_t t = 1; t <= n; ++t) {
        acc.advance(t);
        if (t < lag + 2) continue;
        const double var = acc.centred_sum(0) / static_cast<double>(t);
        if (var <= kDegenerateVariance) {
            throw Error(ErrorKind::DegenerateVariance, "zero prefix variance at t = " + std::to_string(t), t);
        }
        out.push_back(acc.centred_sum(1) / acc.centred_sum(0));
    }
    return EstimateSequence(1, n, lag + 2, std::move(out));
}

namespace {

constexpr std::size_t kSpectralFirstValid = 4;

// Prefix spectral means sum_k gamma_t(k) g_k, optionally divided by
// G(I_t, 1) = gamma_t(0) / 2.
EstimateSequence prefix_spectral(const TimeSeries& ts, const PhiSpec& phi, bool ratio) {
    const std::size_t n = ts.size();
    if (n < kSpectralFirstValid) {
        throw Error(ErrorKind::TooShort, "spectral estimates need n >= 4", n);
    }
    const auto g = fourier_coeffs(phi, n - 1).g;
    std::vector<std::size_t> lags;
    std::vector<double> weights;
    if (ratio) {
        lags.push_back(0);
        weights.push_back(g[0]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (g[k] != 0.0 && !(ratio && k == 0)) {
            lags.push_back(k);
            weights.push_back(g[k]);
        }
    }
    const auto y = centred(ts.values());
    PrefixCovariance acc(y, lags);
    std::vector<double> out;
    out.reserve(n - kSpectralFirstValid + 1);
    for (std::size_t t = 1; t <= n; ++t) {
        acc.advance(t);
        if (t < kSpectralFirstValid) continue;
        double sum = 0.0;
        for (std::size_t j = 0; j < acc.lag_count(); ++j) {
            if (acc.lag(j) < t) sum += weights[j] * acc.centred_sum(j);
        }
        if (ratio) {
            const double total = acc.centred_sum(0);
            if (total / static_cast<double>(t) <= kDegenerateVariance) {
                throw Error(ErrorKind::DegenerateVariance, "zero prefix variance at t = " + std::to_string(t), t);
            }
            out.push_back(sum / (0.5 * total));
        } else {
            out.push_back(sum / static_cast<double>(t));
        }
    }
    return EstimateSequence(1, n, kSpectralFirstValid, std::move(out));
}

}  // namespace

EstimateSequence prefix_spectral_mean(const TimeSeries& ts, const PhiSpec& phi) {
    return prefix_spectral(ts, phi, false);
}

EstimateSequence prefix_spectral_ratio(const TimeSeries& ts, const PhiSpec& phi) {
    return prefix_spectral(ts, phi, true);
}

EstimateSequence prefix_lad_ar(const TimeSeries& ts, std::size_t order) {
    const std::size_t n = ts.size();
    if (order == 0) throw Error(ErrorKind::InvalidArgument, "LAD autoregression order must be at least 1");
    const std::size_t first = order + 10;
    if (n < first) throw Error(ErrorKind::TooShort, "LAD autoregression needs n >= p + 10", n);
    std::vector<double> out;
    out.reserve((n - first + 1) * order);
    Vector warm;
    for (std::size_t t = first; t <= n; ++t) {
        const auto fit = lad_ar_fit(ts.values(), order, t, warm.size() == 0 ? nullptr : &warm);
        warm = fit.coef;
        out.insert(out.end(), warm.data(), warm.data() + warm.size());
    }
    return EstimateSequence(order, n, first, std::move(out));
}

EstimateSequence prefix_estimates(const TimeSeries& ts, const EstimatorSpec& spec) {
    using K = EstimatorSpec::Kind;
    switch (spec.kind) {
        case K::Mean: return prefix_mean(ts);
        case K::Median: return prefix_median(ts);
        case K::AutoCov: return prefix_autocov(ts, spec.lag, spec.divisor);
        case K::AutoCorr: return prefix_autocorr(ts, spec.lag);
        case K::SpectralMean: return prefix_spectral_mean(ts, spec.phi);
        case K::SpectralRatio: return prefix_spectral_ratio(ts, spec.phi);
        case K::LadAr: return prefix_lad_ar(ts, spec.order);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown estimator");
}

namespace {

double full_autocov(std::span<const double> y, std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < y.size(); ++i) s += y[i] * y[i + k];
    return s;
}

}  // namespace

Vector estimate(const TimeSeries& ts, const EstimatorSpec& spec) {
    using K = EstimatorSpec::Kind;
    const auto x = ts.values();
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    Vector out(1);
    switch (spec.kind) {
        case K::Mean: {
            double s = 0.0;
            for (double v : x) s += v;
            out[0] = s / nd;
            return out;
        }
        case K::Median: {
            std::vector<double> v(x.begin(), x.end());
            const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
            std::nth_element(v.begin(), mid, v.end());
            if (n % 2 == 1) {
                out[0] = *mid;
            } else {
                out[0] = 0.5 * (*mid + *std::max_element(v.begin(), mid));
            }
            return out;
        }
        case K::AutoCov: {
            if (spec.lag + 2 > n) throw Error(ErrorKind::LagTooLarge, "lag too large for series");
            const auto y = centred(x);
            const double denom = spec.divisor == AutocovDivisor::FullN ? nd : nd - static_cast<double>(spec.lag);
            out[0] = full_autocov(y, spec.lag) / denom;
            return out;
        }
        case K::AutoCorr: {
            if (spec.lag + 2 > n) throw Error(ErrorKind::LagTooLarge, "lag too large for series");
            const auto y = centred(x);
            const double c0 = full_autocov(y, 0);
            if (c0 / nd <= kDegenerateVariance) throw Error(ErrorKind::DegenerateVariance, "zero variance", n);
            out[0] = full_autocov(y, spec.lag) / c0;
            return out;
        }
        case K::SpectralMean:
        case K::SpectralRatio: {
            if (n < kSpectralFirstValid) throw Error(ErrorKind::TooShort, "spectral estimates need n >= 4", n);
            const auto y = centred(x);
            const auto g = fourier_coeffs(spec.phi, n - 1).g;
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                if (g[k] != 0.0) s += g[k] * full_autocov(y, k);
            }
            if (spec.kind == K::SpectralMean) {
                out[0] = s / nd;
            } else {
                const double c0 = full_autocov(y, 0);
                if (c0 / nd <= kDegenerateVariance) throw Error(ErrorKind::DegenerateVariance, "zero variance", n);
                out[0] = s / (0.5 * c0);
            }
            return out;
        }
        case K::LadAr: {
            if (n < spec.order + 10) throw Error(ErrorKind::TooShort, "LAD autoregression needs n >= p + 10", n);
            return lad_ar_fit(x, spec.order, n).coef;
        }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown estimator");
}

}  // namespace selfnorm
