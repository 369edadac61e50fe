#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace selfnorm {

using Vector = Eigen::VectorXd;
using SquareMatrix = Eigen::MatrixXd;

enum class ErrorKind {
    // input validation
    NonFinite,
    TooShort,
    LagTooLarge,
    BlockTooLong,
    InvalidArgument,
    Parse,
    // numerical failures
    NotPositiveDefinite,
    DegenerateVariance,
    SolverFailed,
    TooFewPrefixes,
    TooManyDegenerateResamples,
};

/// Every failure raised by the library. `index()` carries the offending
/// position or length where the kind has one (NonFinite, TooShort,
/// DegenerateVariance, SolverFailed), and is 0 otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::size_t index = 0)
        : std::runtime_error(what), kind_(kind), index_(index) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] bool is_numerical() const noexcept;

private:
    ErrorKind kind_;
    std::size_t index_;
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

/// Finite real observations x_1..x_n with n >= 2.
class TimeSeries {
public:
    /// Throws Error(NonFinite, i) or Error(TooShort, n).
    explicit TimeSeries(std::vector<double> values);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

private:
    std::vector<double> values_;
};

[[nodiscard]] TimeSeries validate_series(std::span<const double> raw);

/// Reads one observation per line. Blank lines and lines starting with '#'
/// are skipped; for CSV rows the first field is used.
[[nodiscard]] TimeSeries read_series(std::istream& in);

/// Recursive prefix estimates theta_t, t = first_valid..n, each a q-vector.
/// Indices are 1-based raw observation counts: entry t was computed from
/// x_1..x_t. `n()` is the number of observations behind the final estimate.
class EstimateSequence {
public:
    EstimateSequence(std::size_t dim, std::size_t n, std::size_t first_valid,
                     std::vector<double> flat_estimates);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t first_valid() const noexcept { return first_valid_; }
    [[nodiscard]] std::size_t count() const noexcept { return n_ - first_valid_ + 1; }

    /// Estimate at prefix length t, first_valid <= t <= n.
    [[nodiscard]] std::span<const double> at(std::size_t t) const;
    [[nodiscard]] double scalar_at(std::size_t t) const { return at(t)[0]; }
    [[nodiscard]] Vector final_estimate() const;
    [[nodiscard]] std::span<const double> flat() const noexcept { return flat_; }

private:
    std::size_t dim_;
    std::size_t n_;
    std::size_t first_valid_;
    std::vector<double> flat_;
};

/// Solves A x = b for symmetric positive definite A by Cholesky.
/// Throws NotPositiveDefinite if a pivot falls below 1e-14 * max diag(A).
[[nodiscard]] Vector solve_spd(const SquareMatrix& a, const Vector& b);

/// v' A^{-1} v with the same pivot rule as solve_spd.
[[nodiscard]] double inverse_quadratic_form(const SquareMatrix& a, const Vector& v);

/// Type-7 (linear interpolation) sample quantile. `sorted` must be ascending.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double p);
[[nodiscard]] double quantile(std::vector<double> sample, double p);

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
[[nodiscard]] double ks_distance(std::vector<double> a, std::vector<double> b);

[[nodiscard]] double normal_quantile(double p);
[[nodiscard]] double chi_squared_quantile(double dof, double p);

/// Mixes an experiment id and a replication number into a stream index.
[[nodiscard]] std::uint64_t stream_index(std::uint64_t experiment, std::uint64_t replication) noexcept;

/// Deterministic random stream keyed by (master_seed, stream_index). The same
/// pair always yields the same draws, whichever thread consumes them.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t index);

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    /// Uniform integer in [lo, hi].
    std::size_t uniform_index(std::size_t lo, std::size_t hi);
    double student_t(double dof);

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t index() const noexcept { return index_; }

private:
    std::uint64_t seed_;
    std::uint64_t index_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace selfnorm
