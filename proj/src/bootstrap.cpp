#include "selfnorm/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "selfnorm/parallel.hpp"

namespace selfnorm {

namespace {

constexpr int kMaxRedraws = 5;
constexpr double kMaxSkippedShare = 0.05;

void check_block(std::size_t n, std::size_t l) {
    if (l < 1 || l > n) {
        throw Error(ErrorKind::BlockTooLong, "block length must lie in [1, n]", l);
    }
}

std::vector<double> draw_resample(std::span<const double> x, std::size_t l, RngStream& rng) {
    const std::size_t n = x.size();
    const std::size_t blocks = (n + l - 1) / l;
    std::vector<std::size_t> starts(blocks);
    for (auto& s : starts) s = rng.uniform_index(1, n - l + 1);
    return mbb_from_starts(x, l, starts);
}

struct Draw {
    double root = std::numeric_limits<double>::quiet_NaN();   // sqrt(N)(theta* - theta_N), q = 1
    double pivot = std::numeric_limits<double>::quiet_NaN();  // NaN when skipped
    std::size_t redraws = 0;
};

}  // namespace

std::vector<double> mbb_from_starts(std::span<const double> x, std::size_t block_length,
                                    std::span<const std::size_t> starts) {
    const std::size_t n = x.size();
    check_block(n, block_length);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t s : starts) {
        if (s < 1 || s > n - block_length + 1) throw Error(ErrorKind::InvalidArgument, "block start out of range", s);
        for (std::size_t j = 0; j < block_length && out.size() < n; ++j) out.push_back(x[s - 1 + j]);
    }
    if (out.size() != n) throw Error(ErrorKind::InvalidArgument, "too few block starts for a full resample");
    return out;
}

TimeSeries mbb_resample(const TimeSeries& ts, std::size_t block_length, RngStream& rng) {
    check_block(ts.size(), block_length);
    return TimeSeries(draw_resample(ts.values(), block_length, rng));
}

MbbResult mbb_all_schemes(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg, double level,
                          MbbSchemes schemes) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    if (cfg.replications < 2) throw Error(ErrorKind::InvalidArgument, "need at least two bootstrap replications");
    check_block(ts.size(), cfg.block_length);
    const bool scalar_schemes = schemes.percentile || schemes.normal;
    if (scalar_schemes && spec.dim() != 1) {
        throw Error(ErrorKind::InvalidArgument, "percentile and normal bootstrap intervals need a scalar estimate");
    }

    const auto original = prefix_estimates(ts, spec);
    const Vector theta = original.final_estimate();
    const double nd = static_cast<double>(ts.size());
    const double root_n = std::sqrt(nd);

    std::vector<Draw> draws(cfg.replications);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t b) {
        RngStream rng(cfg.seed, b);
        Draw& d = draws[b];
        int estimator_failures = 0;
        int pivot_failures = 0;
        bool have_root = !scalar_schemes;
        for (;;) {
            const TimeSeries resample(draw_resample(ts.values(), cfg.block_length, rng));
            std::optional<EstimateSequence> seq;
            try {
                if (schemes.sn) {
                    seq.emplace(prefix_estimates(resample, spec));
                } else {
                    const Vector est = estimate(resample, spec);
                    d.root = root_n * (est[0] - theta[0]);
                    return;
                }
            } catch (const Error& e) {
                if (!e.is_numerical() || ++estimator_failures > kMaxRedraws) throw;
                ++d.redraws;
                continue;
            }
            const Vector star = seq->final_estimate();
            if (!have_root) {
                d.root = root_n * (star[0] - theta[0]);
                have_root = true;
            }
            try {
                d.pivot = sn_pivot(*seq, wn_matrix(*seq), theta);
                return;
            } catch (const Error& e) {
                if (!e.is_numerical()) throw;
                if (++pivot_failures > kMaxRedraws) return;  // skipped
                ++d.redraws;
            }
        }
    });

    MbbResult out;
    std::vector<double> roots, pivots;
    roots.reserve(draws.size());
    pivots.reserve(draws.size());
    for (const auto& d : draws) {
        out.redraws += d.redraws;
        if (scalar_schemes) roots.push_back(d.root);
        if (schemes.sn) {
            if (std::isnan(d.pivot)) ++out.skipped;
            else pivots.push_back(d.pivot);
        }
    }

    const double alpha = 1.0 - level;
    if (scalar_schemes) {
        std::sort(roots.begin(), roots.end());
        if (schemes.percentile) {
            out.percentile = Interval{theta[0] - quantile_sorted(roots, 1.0 - alpha / 2.0) / root_n,
                                      theta[0] - quantile_sorted(roots, alpha / 2.0) / root_n};
        }
        if (schemes.normal) {
            double mean = 0.0;
            for (double r : roots) mean += r;
            mean /= static_cast<double>(roots.size());
            double ss = 0.0;
            for (double r : roots) ss += (r - mean) * (r - mean);
            out.sigma2 = ss / static_cast<double>(roots.size() - 1);
            const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(out.sigma2) / root_n;
            out.normal = Interval{theta[0] - half, theta[0] + half};
        }
    }
    if (schemes.sn) {
        if (static_cast<double>(out.skipped) > kMaxSkippedShare * static_cast<double>(cfg.replications) ||
            pivots.empty()) {
            throw Error(ErrorKind::TooManyDegenerateResamples,
                        std::to_string(out.skipped) + " of " + std::to_string(cfg.replications) +
                            " bootstrap pivots undefined");
        }
        std::sort(pivots.begin(), pivots.end());
        out.sn_critval = quantile_sorted(pivots, level);
        out.sn = sn_region(original, level, out.sn_critval);
        out.pivots = std::move(pivots);
    }
    out.roots = std::move(roots);
    return out;
}

Interval mbb_percentile_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg, double level) {
    return *mbb_all_schemes(ts, spec, cfg, level, {true, false, false}).percentile;
}

Interval mbb_variance_normal_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg,
                                double level) {
    return *mbb_all_schemes(ts, spec, cfg, level, {false, true, false}).normal;
}

SelfNormResult mbb_sn_ci(const TimeSeries& ts, const EstimatorSpec& spec, const MbbConfig& cfg, double level) {
    return *mbb_all_schemes(ts, spec, cfg, level, {false, false, true}).sn;
}

}  // namespace selfnorm
