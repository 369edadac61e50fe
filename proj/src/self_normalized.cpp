#include "selfnorm/self_normalized.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace selfnorm {

bool Ellipsoid::contains(const Vector& theta) const {
    if (std::isinf(radius2)) return true;
    const Vector d = theta - center;
    if (d.isZero(0.0)) return true;
    return inverse_quadratic_form(shape, d) <= radius2;
}

SquareMatrix wn_matrix(const EstimateSequence& seq) {
    if (seq.count() < 2) {
        throw Error(ErrorKind::TooFewPrefixes, "W_N needs at least two prefix estimates");
    }
    const auto q = static_cast<Eigen::Index>(seq.dim());
    const double nd = static_cast<double>(seq.n());
    if (q == 1) {
        const auto flat = seq.flat();
        const double last = flat.back();
        double s = 0.0;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            const double td = static_cast<double>(seq.first_valid() + i);
            const double d = td * (flat[i] - last);
            s += d * d;
        }
        return SquareMatrix::Constant(1, 1, s / (nd * nd));
    }
    const Vector last = seq.final_estimate();
    SquareMatrix w = SquareMatrix::Zero(q, q);
    Vector d(q);
    for (std::size_t t = seq.first_valid(); t < seq.n(); ++t) {
        const auto est = seq.at(t);
        const double td = static_cast<double>(t);
        for (Eigen::Index j = 0; j < q; ++j) d[j] = td * (est[static_cast<std::size_t>(j)] - last[j]);
        w.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    const SquareMatrix full = w.selfadjointView<Eigen::Lower>();
    return full / (nd * nd);
}

double sn_pivot(const EstimateSequence& seq, const SquareMatrix& w, const Vector& theta0) {
    const Vector d = seq.final_estimate() - theta0;
    return static_cast<double>(seq.n()) * inverse_quadratic_form(w, d);
}

double sn_pivot(const EstimateSequence& seq, const Vector& theta0) {
    return sn_pivot(seq, wn_matrix(seq), theta0);
}

SelfNormResult sn_region(const EstimateSequence& seq, double level, double critval) {
    if (!(critval >= 0.0)) throw Error(ErrorKind::InvalidArgument, "critical value must be non-negative");
    SelfNormResult r;
    r.theta_hat = seq.final_estimate();
    r.w_matrix = wn_matrix(seq);
    r.n_eff = seq.n();
    r.level = level;
    r.critval = critval;
    // Validates positive definiteness even when the region is unbounded.
    (void)solve_spd(r.w_matrix, Vector::Zero(r.theta_hat.size()));
    r.region = Ellipsoid{r.theta_hat, r.w_matrix / static_cast<double>(r.n_eff), critval};
    if (seq.dim() == 1) {
        const double half = std::isinf(critval)
                                ? std::numeric_limits<double>::infinity()
                                : std::sqrt(critval * r.w_matrix(0, 0) / static_cast<double>(r.n_eff));
        r.interval = Interval{r.theta_hat[0] - half, r.theta_hat[0] + half};
    }
    return r;
}

SelfNormResult sn_interval(const EstimateSequence& seq, double level, double critval) {
    if (seq.dim() != 1) throw Error(ErrorKind::InvalidArgument, "sn_interval needs a scalar estimate; use sn_region");
    return sn_region(seq, level, critval);
}

std::string to_json(const SelfNormResult& result) {
    nlohmann::ordered_json j;
    if (result.interval) {
        j["estimate"] = result.theta_hat[0];
        j["L"] = result.interval->lower;
        j["U"] = result.interval->upper;
    } else {
        j["estimate"] = std::vector<double>(result.theta_hat.data(), result.theta_hat.data() + result.theta_hat.size());
        std::vector<std::vector<double>> shape;
        for (Eigen::Index i = 0; i < result.region.shape.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(result.region.shape.cols()));
            for (Eigen::Index k = 0; k < result.region.shape.cols(); ++k) row[static_cast<std::size_t>(k)] = result.region.shape(i, k);
            shape.push_back(std::move(row));
        }
        j["shape"] = shape;
        j["radius2"] = result.region.radius2;
    }
    j["level"] = result.level;
    j["critval"] = result.critval;
    j["N"] = result.n_eff;
    return j.dump();
}

}  // namespace selfnorm
