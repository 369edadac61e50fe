#include <algorithm>
#include <cmath>
#include <numeric>

#include "selfnorm/estimators.hpp"

namespace selfnorm {

namespace {

constexpr double kResidualFloor = 1e-8;
constexpr double kTolerance = 1e-9;
constexpr std::size_t kMaxIrls = 200;
constexpr std::size_t kMaxSweeps = 500;

// Minimiser of sum_i w_i |a_i - b| over b (lower weighted median).
double weighted_median(std::vector<std::pair<double, double>>& pts) {
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (const auto& p : pts) total += p.second;
    double acc = 0.0;
    for (const auto& p : pts) {
        acc += p.second;
        if (acc >= 0.5 * total) return p.first;
    }
    return pts.back().first;
}

struct Design {
    std::span<const double> x;
    std::size_t order;
    std::size_t end;  // inclusive, 1-based

    [[nodiscard]] std::size_t rows() const { return end - order; }
    // Row r (0-based) is observation s = order + 1 + r.
    [[nodiscard]] double response(std::size_t r) const { return x[order + r]; }
    [[nodiscard]] double regressor(std::size_t r, std::size_t j) const { return x[order + r - 1 - j]; }

    [[nodiscard]] double residual(std::size_t r, const Vector& coef) const {
        double fit = 0.0;
        for (std::size_t j = 0; j < order; ++j) fit += coef[static_cast<Eigen::Index>(j)] * regressor(r, j);
        return response(r) - fit;
    }
};

// Weighted least squares step; returns false when the normal equations are singular.
bool weighted_ls(const Design& d, const std::vector<double>& w, Vector& coef) {
    const auto p = static_cast<Eigen::Index>(d.order);
    SquareMatrix xtx = SquareMatrix::Zero(p, p);
    Vector xty = Vector::Zero(p);
    Vector row(p);
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (Eigen::Index j = 0; j < p; ++j) row[j] = d.regressor(r, static_cast<std::size_t>(j));
        xtx.noalias() += w[r] * row * row.transpose();
        xty.noalias() += (w[r] * d.response(r)) * row;
    }
    Eigen::LDLT<SquareMatrix> ldlt(xtx);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array().abs().minCoeff() > 0.0)) return false;
    coef = ldlt.solve(xty);
    return coef.allFinite();
}

// Cyclic coordinate descent: each coordinate update is an exact weighted median.
bool coordinate_descent(const Design& d, Vector& coef, std::size_t& sweeps) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(d.rows());
    double best = lad_objective(d.x, coef, d.end);
    for (sweeps = 0; sweeps < kMaxSweeps; ++sweeps) {
        for (std::size_t j = 0; j < d.order; ++j) {
            pts.clear();
            const auto jj = static_cast<Eigen::Index>(j);
            for (std::size_t r = 0; r < d.rows(); ++r) {
                const double z = d.regressor(r, j);
                if (z == 0.0) continue;
                const double partial = d.residual(r, coef) + coef[jj] * z;
                pts.emplace_back(partial / z, std::abs(z));
            }
            if (pts.empty()) continue;
            const double old = coef[jj];
            coef[jj] = weighted_median(pts);
            if (lad_objective(d.x, coef, d.end) > best) coef[jj] = old;
        }
        const double obj = lad_objective(d.x, coef, d.end);
        if (best - obj <= kTolerance * (1.0 + std::abs(best))) return true;
        best = obj;
    }
    return false;
}

}  // namespace

double lad_objective(std::span<const double> x, const Vector& coef, std::size_t end) {
    const Design d{x, static_cast<std::size_t>(coef.size()), end};
    double s = 0.0;
    for (std::size_t r = 0; r < d.rows(); ++r) s += std::abs(d.residual(r, coef));
    return s;
}

LadFit lad_ar_fit(std::span<const double> x, std::size_t order, std::size_t end, const Vector* warm_start) {
    if (order == 0) throw Error(ErrorKind::InvalidArgument, "LAD autoregression order must be at least 1");
    if (end > x.size() || end < order + 1) throw Error(ErrorKind::TooShort, "not enough observations for LAD fit", end);
    const Design d{x, order, end};
    const auto p = static_cast<Eigen::Index>(order);

    LadFit fit;
    std::vector<double> w(d.rows(), 1.0);
    Vector coef = Vector::Zero(p);
    if (warm_start != nullptr && warm_start->size() == p) {
        coef = *warm_start;
    } else if (!weighted_ls(d, w, coef)) {
        coef.setZero();
    }

    bool converged = false;
    for (fit.iterations = 1; fit.iterations <= kMaxIrls; ++fit.iterations) {
        for (std::size_t r = 0; r < d.rows(); ++r) {
            w[r] = 1.0 / std::max(std::abs(d.residual(r, coef)), kResidualFloor);
        }
        Vector next = coef;
        if (!weighted_ls(d, w, next)) break;
        const double change = (next - coef).lpNorm<Eigen::Infinity>();
        coef = next;
        if (change <= kTolerance * (1.0 + coef.lpNorm<Eigen::Infinity>())) {
            converged = true;
            break;
        }
    }

    // Polish onto an exact breakpoint; only ever lowers the objective.
    std::size_t sweeps = 0;
    const bool polished = coordinate_descent(d, coef, sweeps);
    if (!converged) {
        fit.used_fallback = true;
        if (!polished) {
            throw Error(ErrorKind::SolverFailed, "LAD solver did not converge at t = " + std::to_string(end), end);
        }
    }
    fit.coef = coef;
    return fit;
}

}  // namespace selfnorm
