#include "selfnorm/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace selfnorm {

bool Error::is_numerical() const noexcept {
    switch (kind_) {
        case ErrorKind::NotPositiveDefinite:
        case ErrorKind::DegenerateVariance:
        case ErrorKind::SolverFailed:
        case ErrorKind::TooFewPrefixes:
        case ErrorKind::TooManyDegenerateResamples:
            return true;
        default:
            return false;
    }
}

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::TooShort: return "TooShort";
        case ErrorKind::LagTooLarge: return "LagTooLarge";
        case ErrorKind::BlockTooLong: return "BlockTooLong";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::DegenerateVariance: return "DegenerateVariance";
        case ErrorKind::SolverFailed: return "SolverFailed";
        case ErrorKind::TooFewPrefixes: return "TooFewPrefixes";
        case ErrorKind::TooManyDegenerateResamples: return "TooManyDegenerateResamples";
    }
    return "Unknown";
}

TimeSeries::TimeSeries(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorKind::NonFinite, "non-finite observation at index " + std::to_string(i), i);
        }
    }
    if (values_.size() < 2) {
        throw Error(ErrorKind::TooShort,
                    "series needs at least 2 observations, got " + std::to_string(values_.size()),
                    values_.size());
    }
}

TimeSeries validate_series(std::span<const double> raw) {
    return TimeSeries(std::vector<double>(raw.begin(), raw.end()));
}

TimeSeries read_series(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto field = line.substr(first, line.find_first_of(",;\t ", first) - first);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != field.size() || field.empty()) {
            throw Error(ErrorKind::Parse, "cannot parse line " + std::to_string(line_no) + ": '" + line + "'",
                        line_no);
        }
        values.push_back(value);
    }
    return TimeSeries(std::move(values));
}

EstimateSequence::EstimateSequence(std::size_t dim, std::size_t n, std::size_t first_valid,
                                   std::vector<double> flat_estimates)
    : dim_(dim), n_(n), first_valid_(first_valid), flat_(std::move(flat_estimates)) {
    if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "estimate dimension must be positive");
    if (first_valid_ < 1 || first_valid_ > n_) {
        throw Error(ErrorKind::TooShort, "first valid prefix exceeds sample size", n_);
    }
    if (flat_.size() != dim_ * count()) {
        throw Error(ErrorKind::InvalidArgument, "estimate storage does not match dimension and count");
    }
    for (std::size_t i = 0; i < flat_.size(); ++i) {
        if (!std::isfinite(flat_[i])) {
            throw Error(ErrorKind::NonFinite, "non-finite prefix estimate", first_valid_ + i / dim_);
        }
    }
}

std::span<const double> EstimateSequence::at(std::size_t t) const {
    if (t < first_valid_ || t > n_) throw std::out_of_range("prefix index out of range");
    return std::span<const double>(flat_).subspan((t - first_valid_) * dim_, dim_);
}

Vector EstimateSequence::final_estimate() const {
    const auto last = at(n_);
    return Eigen::Map<const Vector>(last.data(), static_cast<Eigen::Index>(dim_));
}

namespace {

Eigen::LLT<SquareMatrix> checked_cholesky(const SquareMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "matrix must be square and non-empty");
    }
    const double max_diag = a.diagonal().maxCoeff();
    if (!(max_diag > 0.0) || !a.allFinite()) {
        throw Error(ErrorKind::NotPositiveDefinite, "matrix is not positive definite");
    }
    Eigen::LLT<SquareMatrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization failed");
    }
    const auto pivots = llt.matrixLLT().diagonal().array().square();
    if (pivots.minCoeff() <= 1e-14 * max_diag) {
        throw Error(ErrorKind::NotPositiveDefinite, "Cholesky pivot below tolerance");
    }
    return llt;
}

}  // namespace

Vector solve_spd(const SquareMatrix& a, const Vector& b) {
    if (b.size() != a.rows()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch in solve_spd");
    return checked_cholesky(a).solve(b);
}

double inverse_quadratic_form(const SquareMatrix& a, const Vector& v) {
    if (v.size() != a.rows()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch in quadratic form");
    const auto llt = checked_cholesky(a);
    const Vector y = llt.matrixL().solve(v);
    return y.squaredNorm();
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile level outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> sample, double p) {
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, p);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidArgument, "KS distance of empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double normal_quantile(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double chi_squared_quantile(double dof, double p) {
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_index(std::uint64_t experiment, std::uint64_t replication) noexcept {
    return splitmix64(splitmix64(experiment) ^ (replication + 0x632be59bd9b4e019ULL));
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t index)
    : seed_(master_seed), index_(index), engine_(splitmix64(splitmix64(master_seed) ^ splitmix64(~index))) {}

std::size_t RngStream::uniform_index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
}

double RngStream::student_t(double dof) {
    return std::student_t_distribution<double>(dof)(engine_);
}

}  // namespace selfnorm
