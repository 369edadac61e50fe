#include "selfnorm/noncorr.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <json.hpp>

namespace selfnorm {

namespace {

constexpr double kPrewhitenCap = 0.97;
constexpr double kNwConstant = 1.1447;

void check_noncorr_input(const TimeSeries& ts, std::size_t k) {
    if (k < 1) throw Error(ErrorKind::InvalidArgument, "K must be at least 1");
    if (ts.size() <= k + 20) throw Error(ErrorKind::TooShort, "non-correlation tests need n > K + 20", ts.size());
}

std::vector<double> centred(const TimeSeries& ts) {
    const auto v = ts.values();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean;
    return out;
}

// N c' J^{-1} c with J = N^{-2} sum_t s_t s_t', s_t given row-wise in `s`.
double normalised_quadratic(const std::vector<double>& s, const Vector& c, std::size_t k, std::size_t n_eff) {
    const auto ki = static_cast<Eigen::Index>(k);
    SquareMatrix j = SquareMatrix::Zero(ki, ki);
    for (std::size_t t = 0; t < n_eff; ++t) {
        const double* row = s.data() + t * k;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += row[a] * row[b];
            }
        }
    }
    for (Eigen::Index a = 0; a < ki; ++a) {
        for (Eigen::Index b = 0; b < a; ++b) j(b, a) = j(a, b);
    }
    const double nd = static_cast<double>(n_eff);
    j /= nd * nd;
    return nd * inverse_quadratic_form(j, c);
}

}  // namespace

const char* to_string(NoncorrMethod method) noexcept {
    switch (method) {
        case NoncorrMethod::SnRecursive: return "sn";
        case NoncorrMethod::Lobato: return "lobato";
        case NoncorrMethod::NwStudentized: return "nw";
    }
    return "sn";
}

NoncorrMethod parse_noncorr_method(std::string_view text) {
    if (text == "sn") return NoncorrMethod::SnRecursive;
    if (text == "lobato") return NoncorrMethod::Lobato;
    if (text == "nw") return NoncorrMethod::NwStudentized;
    throw Error(ErrorKind::Parse, "unknown non-correlation method '" + std::string(text) + "'");
}

double sn_noncorr_statistic(const TimeSeries& ts, std::size_t k) {
    check_noncorr_input(ts, k);
    const auto x = centred(ts);
    const std::size_t n = x.size();
    const std::size_t n_eff = n - k;

    // cum[s] = x_1 + ... + x_s; prod[j] = sum_{i <= s-j-1} x_i x_{i+j+1} (lag j+1).
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t s = 1; s <= n; ++s) cum[s] = cum[s - 1] + x[s - 1];
    std::vector<double> prod(k, 0.0);
    std::vector<double> c(n_eff * k);

    for (std::size_t s = 1; s <= n; ++s) {
        for (std::size_t lag = 1; lag <= k && lag < s; ++lag) prod[lag - 1] += x[s - 1 - lag] * x[s - 1];
        if (s < k + 1) continue;
        // Window of the first s = t + K observations, prefix mean and divisor s.
        const double sd = static_cast<double>(s);
        const double m = cum[s] / sd;
        const std::size_t t = s - k;
        for (std::size_t lag = 1; lag <= k; ++lag) {
            const double head = cum[s - lag];
            const double tail = cum[s] - cum[lag];
            const double cs = prod[lag - 1] - m * (head + tail) + static_cast<double>(s - lag) * m * m;
            c[(t - 1) * k + lag - 1] = cs / sd;
        }
    }

    Vector c_n(static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) c_n[static_cast<Eigen::Index>(a)] = c[(n_eff - 1) * k + a];
    std::vector<double> s_tilde(n_eff * k);
    for (std::size_t t = 1; t <= n_eff; ++t) {
        for (std::size_t a = 0; a < k; ++a) {
            s_tilde[(t - 1) * k + a] = static_cast<double>(t) * (c[(t - 1) * k + a] - c_n[static_cast<Eigen::Index>(a)]);
        }
    }
    return normalised_quadratic(s_tilde, c_n, k, n_eff);
}

double lobato_statistic(const TimeSeries& ts, std::size_t k) {
    check_noncorr_input(ts, k);
    const auto x = centred(ts);
    const std::size_t n = x.size();
    const std::size_t n_eff = n - k;
    const double nd = static_cast<double>(n);

    Vector c_n = Vector::Zero(static_cast<Eigen::Index>(k));
    for (std::size_t lag = 1; lag <= k; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += x[t] * x[t + lag];
        c_n[static_cast<Eigen::Index>(lag - 1)] = s / nd;
    }
    std::vector<double> partial(n_eff * k);
    std::vector<double> running(k, 0.0);
    for (std::size_t t = 0; t < n_eff; ++t) {
        for (std::size_t lag = 1; lag <= k; ++lag) {
            running[lag - 1] += x[t] * x[t + lag] - c_n[static_cast<Eigen::Index>(lag - 1)];
            partial[t * k + lag - 1] = running[lag - 1];
        }
    }
    return normalised_quadratic(partial, c_n, k, n_eff);
}

std::size_t nw_truncation_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(2.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

std::size_t nw_bandwidth(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 20) throw Error(ErrorKind::TooShort, "bandwidth selection needs at least 20 observations", n);
    const double nd = static_cast<double>(n);
    const std::size_t trunc = nw_truncation_lag(n);

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= nd;
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t j = 0; j <= trunc; ++j) {
        double acc = 0.0;
        for (std::size_t t = j; t < n; ++t) acc += (series[t] - mean) * (series[t - j] - mean);
        const double sigma = acc / nd;
        if (j == 0) {
            s0 += sigma;
        } else {
            s0 += 2.0 * sigma;
            s1 += 2.0 * static_cast<double>(j) * sigma;
        }
    }
    if (!(s0 > 0.0)) return 1;
    const double ratio = s1 / s0;
    const double raw = kNwConstant * std::cbrt(ratio * ratio) * std::cbrt(nd);
    const double capped = std::min(std::ceil(raw), nd - 1.0);
    return capped < 1.0 ? 1 : static_cast<std::size_t>(capped);
}

SquareMatrix bartlett_lrv(const Eigen::MatrixXd& data, std::size_t bandwidth) {
    if (bandwidth < 1) throw Error(ErrorKind::InvalidArgument, "bandwidth must be at least 1");
    const Eigen::Index rows = data.rows();
    const Eigen::MatrixXd e = data.rowwise() - data.colwise().mean();
    const double td = static_cast<double>(rows);
    SquareMatrix v = e.transpose() * e / td;
    const auto l = static_cast<Eigen::Index>(bandwidth);
    for (Eigen::Index j = 1; j < std::min(l, rows); ++j) {
        const double weight = 1.0 - static_cast<double>(j) / static_cast<double>(l);
        const SquareMatrix gamma = e.bottomRows(rows - j).transpose() * e.topRows(rows - j) / td;
        v += weight * (gamma + gamma.transpose());
    }
    return v;
}

namespace {

// Scalar AR(1) fit per column of the centred data, |a| capped; returns coefficients and residuals.
std::pair<Vector, Eigen::MatrixXd> prewhiten_columns(Eigen::MatrixXd w) {
    w = w.rowwise() - w.colwise().mean();
    const Eigen::Index rows = w.rows(), cols = w.cols();
    Vector a(cols);
    Eigen::MatrixXd resid(rows - 1, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const auto cur = w.col(c).tail(rows - 1);
        const auto lagged = w.col(c).head(rows - 1);
        const double denom = lagged.squaredNorm();
        double coef = denom > 0.0 ? cur.dot(lagged) / denom : 0.0;
        coef = std::clamp(coef, -kPrewhitenCap, kPrewhitenCap);
        a[c] = coef;
        resid.col(c) = cur - coef * lagged;
    }
    return {a, resid};
}

std::size_t residual_bandwidth(const Eigen::MatrixXd& resid) {
    const Vector aggregate = resid.rowwise().sum();
    return nw_bandwidth(std::span<const double>(aggregate.data(), static_cast<std::size_t>(aggregate.size())));
}

}  // namespace

LrvEstimate prewhitened_product_lrv(const TimeSeries& ts, std::size_t k) {
    const auto x = centred(ts);
    const std::size_t n = x.size();
    const auto rows = static_cast<Eigen::Index>(n - k);
    const auto cols = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = static_cast<std::size_t>(r) + k;
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = x[t] * x[t - static_cast<std::size_t>(c) - 1];
    }
    const auto [a, resid] = prewhiten_columns(w);
    LrvEstimate out;
    out.bandwidth = residual_bandwidth(resid);
    out.prewhitened = true;
    SquareMatrix omega = bartlett_lrv(resid, out.bandwidth);
    for (Eigen::Index i = 0; i < cols; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) omega(i, j) /= (1.0 - a[i]) * (1.0 - a[j]);
    }
    out.matrix = omega;
    return out;
}

double qtilde_statistic(const TimeSeries& ts, std::size_t k) {
    check_noncorr_input(ts, k);
    const auto x = centred(ts);
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    Vector gamma(static_cast<Eigen::Index>(k + 1));
    for (std::size_t lag = 0; lag <= k; ++lag) {
        double s = 0.0;
        for (std::size_t t = lag; t < n; ++t) s += x[t] * x[t - lag];
        gamma[static_cast<Eigen::Index>(lag)] = s / nd;
    }
    const double g0 = gamma[0];
    if (!(g0 > 1e-14)) throw Error(ErrorKind::DegenerateVariance, "sample variance is zero", n);
    const Vector rho = gamma.tail(static_cast<Eigen::Index>(k)) / g0;
    // Jacobian of rho in (gamma(0), gamma(1..K)) at rho = 0 is [0 | I / gamma(0)].
    const SquareMatrix v = prewhitened_product_lrv(ts, k).matrix / (g0 * g0);
    return nd * inverse_quadratic_form(v, rho);
}

double noncorr_statistic(const TimeSeries& ts, std::size_t k, NoncorrMethod method) {
    switch (method) {
        case NoncorrMethod::SnRecursive: return sn_noncorr_statistic(ts, k);
        case NoncorrMethod::Lobato: return lobato_statistic(ts, k);
        case NoncorrMethod::NwStudentized: return qtilde_statistic(ts, k);
    }
    return 0.0;
}

double noncorr_critval(NoncorrMethod method, std::size_t k, double alpha, CritvalSource& source) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    if (method == NoncorrMethod::NwStudentized) return chi_squared_quantile(static_cast<double>(k), 1.0 - alpha);
    return source.critval(k, alpha);
}

NoncorrResult noncorr_test(const TimeSeries& ts, std::size_t k, NoncorrMethod method, double alpha,
                           CritvalSource& source) {
    NoncorrResult r;
    r.k = k;
    r.method = method;
    r.statistic = noncorr_statistic(ts, k, method);
    r.critval = noncorr_critval(method, k, alpha, source);
    r.reject = r.statistic > r.critval;
    return r;
}

NoncorrResult sn_noncorr_test(const TimeSeries& ts, std::size_t k, double alpha, CritvalSource& source) {
    return noncorr_test(ts, k, NoncorrMethod::SnRecursive, alpha, source);
}

NoncorrResult lobato_test(const TimeSeries& ts, std::size_t k, double alpha, CritvalSource& source) {
    return noncorr_test(ts, k, NoncorrMethod::Lobato, alpha, source);
}

NoncorrResult qtilde_test(const TimeSeries& ts, std::size_t k, double alpha) {
    FixedCritval unused(0.0);
    return noncorr_test(ts, k, NoncorrMethod::NwStudentized, alpha, unused);
}

std::string to_json(const NoncorrResult& result) {
    nlohmann::ordered_json j;
    j["method"] = to_string(result.method);
    j["K"] = result.k;
    j["statistic"] = result.statistic;
    j["critval"] = result.critval;
    j["reject"] = result.reject;
    return j.dump();
}

EfficientCi efficient_ci(const TimeSeries& ts, EfficientTarget target, double level) {
    if (ts.size() < 50) throw Error(ErrorKind::TooShort, "efficient intervals need n >= 50", ts.size());
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    const auto x = centred(ts);
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);

    const auto rows = static_cast<Eigen::Index>(n - 1);
    Eigen::MatrixXd w(rows, 2);
    double g0 = x[0] * x[0], g1 = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - 1);
        w(r, 0) = x[t] * x[t];
        w(r, 1) = x[t] * x[t - 1];
        g0 += w(r, 0);
        g1 += w(r, 1);
    }
    g0 /= nd;
    g1 /= nd;

    // bandwidth chosen as for the prewhitened Wald test; the lag window itself runs on the raw products
    EfficientCi out;
    out.bandwidth = residual_bandwidth(prewhiten_columns(w).second);
    const SquareMatrix v = bartlett_lrv(w, out.bandwidth);

    if (target == EfficientTarget::Gamma1) {
        out.estimate = g1;
        out.variance = v(1, 1);
    } else {
        if (!(g0 > 1e-14)) throw Error(ErrorKind::DegenerateVariance, "sample variance is zero", n);
        const double rho = g1 / g0;
        out.estimate = rho;
        out.variance = (v(1, 1) - 2.0 * rho * v(0, 1) + rho * rho * v(0, 0)) / (g0 * g0);
    }
    if (!(out.variance > 0.0) || !std::isfinite(out.variance)) {
        throw Error(ErrorKind::NotPositiveDefinite, "estimated asymptotic variance is not positive");
    }
    const double half = normal_quantile(0.5 + level / 2.0) * std::sqrt(out.variance / nd);
    out.interval = Interval{out.estimate - half, out.estimate + half};
    return out;
}

}  // namespace selfnorm
