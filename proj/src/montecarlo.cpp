#include "selfnorm/montecarlo.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "selfnorm/bootstrap.hpp"
#include "selfnorm/parallel.hpp"
#include "selfnorm/self_normalized.hpp"

namespace selfnorm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMinReplications = 100;
constexpr std::size_t kSeriesTerms = 5000;

void check_replications(std::size_t r) {
    if (r < kMinReplications) throw Error(ErrorKind::InvalidArgument, "experiments need at least 100 replications");
}

std::string k_label(std::size_t k) { return "K=" + std::to_string(k); }

ReportRow make_row(const std::string& model, std::size_t n, std::string target, std::string method, double level,
                   std::size_t hits, std::size_t trials, std::size_t failures) {
    ReportRow row;
    row.model = model;
    row.n = n;
    row.target = std::move(target);
    row.method = std::move(method);
    row.level_or_alpha = level;
    row.trials = trials;
    row.failures = failures;
    row.value_pct = trials == 0 ? kNaN : 100.0 * static_cast<double>(hits) / static_cast<double>(trials);
    row.se_pct = trials == 0 ? kNaN : mc_standard_error_pct(row.value_pct, trials);
    return row;
}

struct TestCell {
    NoncorrMethod method;
    std::size_t k;
};

std::vector<TestCell> test_cells(const TestExperimentConfig& cfg) {
    std::vector<TestCell> cells;
    for (auto m : cfg.methods) {
        for (auto k : cfg.ks) cells.push_back({m, k});
    }
    return cells;
}

// statistics[r * cells + c]; NaN where the test failed.
std::vector<double> simulate_statistics(const TestExperimentConfig& cfg, const ModelSpec& model,
                                        const std::vector<TestCell>& cells) {
    std::vector<double> stats(cfg.replications * cells.size(), kNaN);
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t r) {
        RngStream rng(cfg.seed, stream_index(cfg.experiment, r));
        const TimeSeries ts = generate(model, cfg.n, rng);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                stats[r * cells.size() + c] = noncorr_statistic(ts, cells[c].k, cells[c].method);
            } catch (const Error&) {
                // recorded as a failure for this cell
            }
        }
    });
    return stats;
}

ExperimentReport tabulate_rejections(const TestExperimentConfig& cfg, const std::vector<TestCell>& cells,
                                     const std::vector<double>& stats,
                                     const std::map<std::pair<std::size_t, double>, double>& critvals) {
    ExperimentReport report;
    const std::string model = cfg.model.name();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (double alpha : cfg.alphas) {
            const double crit = critvals.at({c, alpha});
            std::size_t hits = 0, trials = 0, failures = 0;
            for (std::size_t r = 0; r < cfg.replications; ++r) {
                const double s = stats[r * cells.size() + c];
                if (std::isnan(s)) {
                    ++failures;
                    continue;
                }
                ++trials;
                if (s > crit) ++hits;
            }
            report.rows.push_back(
                make_row(model, cfg.n, k_label(cells[c].k), to_string(cells[c].method), alpha, hits, trials, failures));
        }
    }
    return report;
}

std::map<std::pair<std::size_t, double>, double> nominal_critvals(const TestExperimentConfig& cfg,
                                                                  const std::vector<TestCell>& cells,
                                                                  CritvalSource& source) {
    std::map<std::pair<std::size_t, double>, double> out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (double alpha : cfg.alphas) {
            out[{c, alpha}] = cfg.critval_override ? *cfg.critval_override
                                                   : noncorr_critval(cells[c].method, cells[c].k, alpha, source);
        }
    }
    return out;
}

// Uncorrelated models with a symmetric marginal law.
bool symmetric_uncorrelated(ModelSpec::Kind k) {
    using K = ModelSpec::Kind;
    return k == K::IidNormal || k == K::IidT6 || k == K::OneDependent || k == K::Hetero12 || k == K::Garch11;
}

bool uncorrelated(ModelSpec::Kind k) {
    using K = ModelSpec::Kind;
    return k != K::ArmaFamily && k != K::Ar1;
}

}  // namespace

void ExperimentReport::append(const ExperimentReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

const ReportRow* ExperimentReport::find(std::string_view target, std::string_view method, double level_or_alpha,
                                        std::optional<std::size_t> block_length) const {
    for (const auto& row : rows) {
        if (row.target == target && row.method == method && std::abs(row.level_or_alpha - level_or_alpha) < 1e-12 &&
            row.block_length == block_length) {
            return &row;
        }
    }
    return nullptr;
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream os;
    os << "model,n,target,method,level_or_alpha,value_pct,se_pct,mean_width,block_length,trials,failures,empty\n";
    os << std::setprecision(10);
    for (const auto& r : rows) {
        os << r.model << ',' << r.n << ',' << r.target << ',' << r.method << ',' << r.level_or_alpha << ','
           << r.value_pct << ',' << r.se_pct << ',';
        if (r.mean_width) os << *r.mean_width;
        os << ',';
        if (r.block_length) os << *r.block_length;
        os << ',' << r.trials << ',' << r.failures << ',' << r.empty << '\n';
    }
    return os.str();
}

double mc_standard_error_pct(double value_pct, std::size_t replications) {
    const double p = value_pct / 100.0;
    return 100.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
}

ExperimentReport run_size_experiment(const TestExperimentConfig& cfg, CritvalSource& source) {
    check_replications(cfg.replications);
    const auto cells = test_cells(cfg);
    const auto critvals = nominal_critvals(cfg, cells, source);
    const auto stats = simulate_statistics(cfg, cfg.model, cells);
    return tabulate_rejections(cfg, cells, stats, critvals);
}

ExperimentReport run_power_experiment(const TestExperimentConfig& cfg, bool size_adjust, CritvalSource& source,
                                      std::optional<ModelSpec> null_model) {
    check_replications(cfg.replications);
    const auto cells = test_cells(cfg);
    if (!size_adjust) return run_size_experiment(cfg, source);

    if (!null_model) {
        if (cfg.model.kind != ModelSpec::Kind::Ar1) {
            throw Error(ErrorKind::InvalidArgument, "size adjustment needs a null model for " + cfg.model.name());
        }
        null_model = ModelSpec::ar1(0.0, cfg.model.innovation);
    }
    const auto null_stats = simulate_statistics(cfg, *null_model, cells);
    std::map<std::pair<std::size_t, double>, double> critvals;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> sample;
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            const double s = null_stats[r * cells.size() + c];
            if (!std::isnan(s)) sample.push_back(s);
        }
        for (double alpha : cfg.alphas) {
            if (cfg.critval_override) {
                critvals[{c, alpha}] = *cfg.critval_override;
            } else {
                critvals[{c, alpha}] = sample.empty() ? std::numeric_limits<double>::infinity()
                                                      : quantile(sample, 1.0 - alpha);
            }
        }
    }
    const auto stats = simulate_statistics(cfg, cfg.model, cells);
    return tabulate_rejections(cfg, cells, stats, critvals);
}

const char* to_string(CiMethod method) noexcept {
    switch (method) {
        case CiMethod::Sn: return "sn";
        case CiMethod::Efficient: return "efficient";
        case CiMethod::MbbPercentile: return "mbb-pct";
        case CiMethod::MbbNormal: return "mbb-normal";
        case CiMethod::MbbSn: return "mbb-sn";
    }
    return "sn";
}

CiMethod parse_ci_method(std::string_view text) {
    if (text == "sn") return CiMethod::Sn;
    if (text == "efficient") return CiMethod::Efficient;
    if (text == "mbb-pct") return CiMethod::MbbPercentile;
    if (text == "mbb-normal") return CiMethod::MbbNormal;
    if (text == "mbb-sn") return CiMethod::MbbSn;
    throw Error(ErrorKind::Parse, "unknown interval method '" + std::string(text) + "'");
}

namespace {

struct CoverageCell {
    std::size_t target;
    CiMethod method;
    double level;
    std::size_t block;  // 0 when not a bootstrap method
};

struct Outcome {
    bool ok = false;
    bool covered = false;
    bool empty = false;
    double width = kNaN;
};

std::optional<EfficientTarget> efficient_target(const EstimatorSpec& spec) {
    if (spec.kind == EstimatorSpec::Kind::AutoCov && spec.lag == 1 && spec.divisor == AutocovDivisor::FullN) {
        return EfficientTarget::Gamma1;
    }
    if (spec.kind == EstimatorSpec::Kind::AutoCorr && spec.lag == 1) return EfficientTarget::Rho1;
    return std::nullopt;
}

bool is_bootstrap(CiMethod m) {
    return m == CiMethod::MbbPercentile || m == CiMethod::MbbNormal || m == CiMethod::MbbSn;
}

void record_interval(Outcome& o, const Interval& iv, double truth) {
    o.ok = true;
    o.empty = iv.empty();
    o.covered = !o.empty && iv.contains(truth);
    o.width = iv.width();
}

}  // namespace

ExperimentReport run_coverage_experiment(const CoverageConfig& cfg, CritvalSource& source) {
    check_replications(cfg.replications);
    for (double level : cfg.levels) {
        if (!(level > 0.0 && level < 1.0)) throw Error(ErrorKind::InvalidArgument, "level must lie in (0, 1)");
    }

    std::vector<Vector> truths;
    for (const auto& spec : cfg.targets) {
        auto t = cfg.truth ? cfg.truth : true_parameter(cfg.model, spec);
        if (!t) {
            throw Error(ErrorKind::InvalidArgument,
                        "no known true value of " + spec.to_string() + " under " + cfg.model.name());
        }
        if (static_cast<std::size_t>(t->size()) != spec.dim()) {
            throw Error(ErrorKind::InvalidArgument, "true value has the wrong dimension for " + spec.to_string());
        }
        truths.push_back(*t);
    }

    std::vector<CoverageCell> cells;
    for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
        const auto& spec = cfg.targets[i];
        for (auto m : cfg.methods) {
            if (m == CiMethod::Efficient && !efficient_target(spec)) continue;
            if ((m == CiMethod::MbbPercentile || m == CiMethod::MbbNormal) && spec.dim() != 1) continue;
            for (double level : cfg.levels) {
                if (is_bootstrap(m)) {
                    for (auto l : cfg.block_lengths) cells.push_back({i, m, level, l});
                } else {
                    cells.push_back({i, m, level, 0});
                }
            }
        }
    }

    std::map<std::pair<std::size_t, double>, double> sn_crit;
    for (const auto& c : cells) {
        if (c.method != CiMethod::Sn) continue;
        const std::size_t q = cfg.targets[c.target].dim();
        if (!sn_crit.contains({q, c.level})) {
            sn_crit[{q, c.level}] = cfg.critval_override ? *cfg.critval_override : source.critval(q, 1.0 - c.level);
        }
    }

    std::vector<Outcome> outcomes(cfg.replications * cells.size());
    parallel_for(cfg.replications, cfg.workers, [&](std::size_t r) {
        const std::uint64_t stream = stream_index(cfg.experiment, r);
        RngStream rng(cfg.seed, stream);
        const TimeSeries ts = generate(cfg.model, cfg.n, rng);
        Outcome* out = outcomes.data() + r * cells.size();

        for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
            const auto& spec = cfg.targets[i];
            const Vector& truth = truths[i];
            std::optional<EstimateSequence> seq;
            bool seq_failed = false;
            // Bootstrap results per (block, level), shared across the three schemes.
            std::map<std::pair<std::size_t, double>, std::optional<MbbResult>> boot;

            for (std::size_t c = 0; c < cells.size(); ++c) {
                const auto& cell = cells[c];
                if (cell.target != i) continue;
                try {
                    switch (cell.method) {
                        case CiMethod::Sn: {
                            if (seq_failed) break;
                            if (!seq) {
                                try {
                                    seq.emplace(prefix_estimates(ts, spec));
                                } catch (const Error&) {
                                    seq_failed = true;
                                    break;
                                }
                            }
                            const auto res = sn_region(*seq, cell.level, sn_crit.at({spec.dim(), cell.level}));
                            if (res.interval) {
                                record_interval(out[c], *res.interval, truth[0]);
                            } else {
                                out[c].ok = true;
                                out[c].covered = res.region.contains(truth);
                            }
                            break;
                        }
                        case CiMethod::Efficient: {
                            const auto ci = efficient_ci(ts, *efficient_target(spec), cell.level);
                            record_interval(out[c], ci.interval, truth[0]);
                            break;
                        }
                        case CiMethod::MbbPercentile:
                        case CiMethod::MbbNormal:
                        case CiMethod::MbbSn: {
                            auto& slot = boot[{cell.block, cell.level}];
                            if (!slot) {
                                MbbSchemes schemes{false, false, false};
                                for (const auto& other : cells) {
                                    if (other.target != i || other.block != cell.block || other.level != cell.level) {
                                        continue;
                                    }
                                    schemes.percentile |= other.method == CiMethod::MbbPercentile;
                                    schemes.normal |= other.method == CiMethod::MbbNormal;
                                    schemes.sn |= other.method == CiMethod::MbbSn;
                                }
                                MbbConfig mcfg;
                                mcfg.block_length = cell.block;
                                mcfg.replications = cfg.bootstrap_reps;
                                mcfg.seed = cfg.seed ^ stream_index(stream, cell.block);
                                mcfg.workers = 1;
                                slot = mbb_all_schemes(ts, spec, mcfg, cell.level, schemes);
                            }
                            if (cell.method == CiMethod::MbbPercentile) {
                                record_interval(out[c], *slot->percentile, truth[0]);
                            } else if (cell.method == CiMethod::MbbNormal) {
                                record_interval(out[c], *slot->normal, truth[0]);
                            } else if (slot->sn->interval) {
                                record_interval(out[c], *slot->sn->interval, truth[0]);
                            } else {
                                out[c].ok = true;
                                out[c].covered = slot->sn->region.contains(truth);
                            }
                            break;
                        }
                    }
                } catch (const Error&) {
                    out[c] = Outcome{};
                }
            }
        }
    });

    ExperimentReport report;
    const std::string model = cfg.model.name();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::size_t hits = 0, trials = 0, empty = 0, widths = 0;
        double width_sum = 0.0;
        for (std::size_t r = 0; r < cfg.replications; ++r) {
            const auto& o = outcomes[r * cells.size() + c];
            if (!o.ok) continue;
            ++trials;
            if (o.covered) ++hits;
            if (o.empty) ++empty;
            if (!std::isnan(o.width)) {
                width_sum += o.width;
                ++widths;
            }
        }
        auto row = make_row(model, cfg.n, cfg.targets[cells[c].target].to_string(), to_string(cells[c].method),
                            cells[c].level, hits, trials, cfg.replications - trials);
        row.empty = empty;
        if (widths > 0) row.mean_width = width_sum / static_cast<double>(widths);
        if (cells[c].block > 0) row.block_length = cells[c].block;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::optional<std::vector<double>> population_autocov(const ModelSpec& model, std::size_t k_max) {
    using K = ModelSpec::Kind;
    std::vector<double> g(k_max + 1, 0.0);
    auto white = [&](double variance) {
        g[0] = variance;
        return g;
    };
    auto ar1 = [&](double rho, double innovation_variance) {
        g[0] = innovation_variance / (1.0 - rho * rho);
        for (std::size_t k = 1; k <= k_max; ++k) g[k] = rho * g[k - 1];
        return g;
    };
    switch (model.kind) {
        case K::IidNormal: return white(1.0);
        case K::IidT6: return white(6.0 / 4.0);
        case K::DemeanedLogNormal: return white(std::exp(1.0) * (std::exp(1.0) - 1.0));
        case K::OneDependent: return white(1.0);
        case K::Hetero12: return std::nullopt;
        case K::NonMds: return white(5.0);
        case K::Garch11: return white(0.001 / (1.0 - 0.02 - 0.8));
        case K::Bilinear: return white(4.0 / 3.0);
        case K::Ar1: {
            double v = 1.0;
            if (model.innovation == ModelSpec::Innovation::Garch) v = 0.001 / (1.0 - 0.02 - 0.8);
            if (model.innovation == ModelSpec::Innovation::Bilinear) v = 4.0 / 3.0;
            return ar1(model.rho, v);
        }
        case K::ArmaFamily: {
            if (model.family <= 3) return ar1(0.7, 1.0);
            if (model.family <= 6) {
                g[0] = 1.0 + 0.8 * 0.8;
                if (k_max >= 1) g[1] = 0.8;
                return g;
            }
            const double p1 = 0.6, p2 = 0.35;
            g[0] = (1.0 - p2) / ((1.0 + p2) * ((1.0 - p2) * (1.0 - p2) - p1 * p1));
            if (k_max >= 1) g[1] = g[0] * p1 / (1.0 - p2);
            for (std::size_t k = 2; k <= k_max; ++k) g[k] = p1 * g[k - 1] + p2 * g[k - 2];
            return g;
        }
    }
    return std::nullopt;
}

std::optional<Vector> true_parameter(const ModelSpec& model, const EstimatorSpec& spec) {
    using K = ModelSpec::Kind;
    using S = EstimatorSpec::Kind;
    auto scalar = [](double v) -> std::optional<Vector> { return Vector::Constant(1, v); };

    switch (spec.kind) {
        case S::Mean:
            return scalar(0.0);
        case S::Median: {
            if (model.kind == K::DemeanedLogNormal) return scalar(1.0 - std::exp(0.5));
            if (symmetric_uncorrelated(model.kind) || model.kind == K::ArmaFamily) return scalar(0.0);
            if (model.kind == K::Ar1 && model.innovation != ModelSpec::Innovation::Bilinear) return scalar(0.0);
            return std::nullopt;
        }
        case S::AutoCov:
        case S::AutoCorr: {
            if (uncorrelated(model.kind) && spec.lag >= 1) return scalar(0.0);
            const auto g = population_autocov(model, spec.lag);
            if (!g) return std::nullopt;
            if (spec.kind == S::AutoCov) return scalar((*g)[spec.lag]);
            return scalar((*g)[spec.lag] / (*g)[0]);
        }
        case S::SpectralMean:
        case S::SpectralRatio: {
            const auto g = population_autocov(model, kSeriesTerms);
            if (!g) return std::nullopt;
            const auto coeffs = fourier_coeffs(spec.phi, kSeriesTerms);
            double value = 0.0;
            for (std::size_t k = 0; k <= kSeriesTerms; ++k) value += (*g)[k] * coeffs.g[k];
            if (spec.kind == S::SpectralRatio) value /= 0.5 * (*g)[0];
            return scalar(value);
        }
        case S::LadAr: {
            Vector coef = Vector::Zero(static_cast<Eigen::Index>(spec.order));
            if (model.kind == K::IidNormal || model.kind == K::IidT6) return coef;
            if (model.kind == K::ArmaFamily && model.family <= 3) {
                coef[0] = 0.7;
                return coef;
            }
            if (model.kind == K::ArmaFamily && model.family >= 7 && spec.order >= 2) {
                coef[0] = 0.6;
                coef[1] = 0.35;
                return coef;
            }
            if (model.kind == K::Ar1 && model.innovation != ModelSpec::Innovation::Bilinear) {
                coef[0] = model.rho;
                return coef;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace selfnorm
