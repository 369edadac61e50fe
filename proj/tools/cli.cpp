#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfnorm/bootstrap.hpp"
#include "selfnorm/critvals.hpp"
#include "selfnorm/dgp.hpp"
#include "selfnorm/estimators.hpp"
#include "selfnorm/montecarlo.hpp"
#include "selfnorm/noncorr.hpp"
#include "selfnorm/self_normalized.hpp"

namespace selfnorm::cli {

namespace {

struct Options {
    // shared
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::string cache_dir;
    std::string input = "-";
    // ci
    std::string stat = "mean";
    std::string ci_method = "sn";
    double level = 0.95;
    std::size_t block = 5;
    std::size_t reps = 1000;
    std::optional<double> critval;
    // test-noncorr
    std::size_t k = 1;
    std::string test_method = "sn";
    double alpha = 0.05;
    // critvals
    std::size_t q = 1;
    std::vector<double> alphas;
    std::size_t grid = kDefaultGrid;
    std::optional<std::size_t> sim_reps;
    // simulate
    std::string table;
    double scale = 0.2;
    std::string output;
    // generate
    std::string model;
    std::size_t n = 0;
};

std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

TimeSeries load_series(const std::string& path, std::istream& in) {
    if (path.empty() || path == "-") return read_series(in);
    std::ifstream file(path);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot open input file '" + path + "'");
    return read_series(file);
}

std::unique_ptr<CritvalCache> make_cache(const Options& o) {
    const auto dir = o.cache_dir.empty() ? CritvalCache::default_directory() : std::filesystem::path(o.cache_dir);
    return std::make_unique<CritvalCache>(dir, kDefaultCritvalSeed, kDefaultGrid, o.workers);
}

std::string interval_json(const Vector& theta, const Interval& iv, const Options& o, std::size_t n,
                          std::optional<double> critval) {
    nlohmann::ordered_json j;
    j["estimate"] = theta[0];
    j["L"] = iv.lower;
    j["U"] = iv.upper;
    j["level"] = o.level;
    j["method"] = o.ci_method;
    if (o.ci_method != "efficient") {
        j["block"] = o.block;
        j["reps"] = o.reps;
    }
    if (critval) j["critval"] = *critval;
    j["N"] = n;
    return j.dump();
}

void run_ci(const Options& o, std::istream& in, std::ostream& out) {
    const TimeSeries ts = load_series(o.input, in);
    const EstimatorSpec spec = EstimatorSpec::parse(o.stat);
    if (!(o.level > 0.0 && o.level < 1.0)) throw Error(ErrorKind::InvalidArgument, "--level must lie in (0, 1)");
    const CiMethod method = parse_ci_method(o.ci_method);

    if (method == CiMethod::Sn) {
        const auto seq = prefix_estimates(ts, spec);
        double crit = 0.0;
        if (o.critval) {
            crit = *o.critval;
        } else {
            crit = make_cache(o)->critval(spec.dim(), 1.0 - o.level);
        }
        out << to_json(sn_region(seq, o.level, crit)) << '\n';
        return;
    }
    if (method == CiMethod::Efficient) {
        EfficientTarget target = EfficientTarget::Rho1;
        if (spec == EstimatorSpec::autocov(1)) target = EfficientTarget::Gamma1;
        else if (spec != EstimatorSpec::autocorr(1)) {
            throw Error(ErrorKind::InvalidArgument, "--method efficient supports --stat acov:1 and acf:1 only");
        }
        const auto ci = efficient_ci(ts, target, o.level);
        out << interval_json(Vector::Constant(1, ci.estimate), ci.interval, o, ts.size(), std::nullopt) << '\n';
        return;
    }

    MbbConfig cfg;
    cfg.block_length = o.block;
    cfg.replications = o.reps;
    cfg.seed = *o.seed;
    cfg.workers = o.workers;
    const MbbSchemes schemes{method == CiMethod::MbbPercentile, method == CiMethod::MbbNormal,
                             method == CiMethod::MbbSn};
    const auto result = mbb_all_schemes(ts, spec, cfg, o.level, schemes);
    const Vector theta = estimate(ts, spec);
    if (method == CiMethod::MbbPercentile) {
        out << interval_json(theta, *result.percentile, o, ts.size(), std::nullopt) << '\n';
    } else if (method == CiMethod::MbbNormal) {
        out << interval_json(theta, *result.normal, o, ts.size(), std::nullopt) << '\n';
    } else if (result.sn->interval) {
        out << interval_json(theta, *result.sn->interval, o, ts.size(), result.sn_critval) << '\n';
    } else {
        out << to_json(*result.sn) << '\n';
    }
}

void run_test(const Options& o, std::istream& in, std::ostream& out) {
    const TimeSeries ts = load_series(o.input, in);
    const NoncorrMethod method = parse_noncorr_method(o.test_method);
    std::unique_ptr<CritvalSource> source;
    if (o.critval) source = std::make_unique<FixedCritval>(*o.critval);
    else source = make_cache(o);
    auto result = noncorr_test(ts, o.k, method, o.alpha, *source);
    if (o.critval && method == NoncorrMethod::NwStudentized) {
        result.critval = *o.critval;
        result.reject = result.statistic > result.critval;
    }
    out << to_json(result) << '\n';
}

void run_critvals(const Options& o, std::ostream& out) {
    auto alphas = o.alphas.empty() ? default_alphas() : o.alphas;
    const std::size_t reps = o.sim_reps.value_or(default_reps(o.q));
    const bool cached = o.grid == kDefaultGrid && reps == default_reps(o.q) && *o.seed == kDefaultCritvalSeed;
    CritvalTable table;
    if (cached) {
        auto cache = make_cache(o);
        for (double a : alphas) table = cache->table(o.q, a);
    } else {
        table = simulate_uq(o.q, o.grid, reps, *o.seed, alphas, false, o.workers);
    }
    for (double a : alphas) {
        nlohmann::ordered_json j;
        j["q"] = table.q;
        j["alpha"] = a;
        j["critval"] = table.at(a);
        j["grid"] = table.grid;
        j["reps"] = table.reps;
        j["seed"] = table.seed;
        j["cached"] = cached;
        out << j.dump() << '\n';
    }
}

void run_simulate(const Options& o, std::ostream& out) {
    auto cache = make_cache(o);
    const auto report = run_table(o.table, o.scale, *cache, *o.seed, o.workers);
    if (o.output.empty()) {
        out << report.to_csv();
        return;
    }
    std::ofstream file(o.output);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write '" + o.output + "'");
    file << report.to_csv();
}

void run_generate(const Options& o, std::ostream& out) {
    const ModelSpec model = ModelSpec::parse(o.model);
    RngStream rng(*o.seed, 0);
    const TimeSeries ts = generate(model, o.n, rng);
    std::ostringstream os;
    os << std::setprecision(17);
    for (double v : ts.values()) os << v << '\n';
    out << os.str();
}

std::string repro_command(int argc, const char* const* argv, bool seed_given, std::uint64_t seed) {
    std::ostringstream os;
    os << "selfnorm";
    for (int i = 1; i < argc; ++i) os << ' ' << argv[i];
    if (!seed_given) os << " --seed " << seed;
    return os.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Self-normalised confidence intervals and non-correlation tests for time series", "selfnorm"};
    app.require_subcommand(1);

    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Master seed (64-bit)"); };
    auto add_workers = [&](CLI::App* sub) {
        sub->add_option("--workers", o.workers, "Monte Carlo worker threads (0 = all cores)");
    };
    auto add_cache = [&](CLI::App* sub) {
        sub->add_option("--cache", o.cache_dir, "Critical value cache directory");
    };

    auto* ci = app.add_subcommand("ci", "Confidence interval for one statistic");
    ci->add_option("--stat", o.stat, "mean, median, acov:k, acovt:k, acf:k, specmean:x, specratio:x, ladar:p");
    ci->add_option("--method", o.ci_method, "sn, mbb-pct, mbb-normal, mbb-sn, efficient");
    ci->add_option("--level", o.level, "Confidence level");
    ci->add_option("--block", o.block, "Bootstrap block length");
    ci->add_option("--reps", o.reps, "Bootstrap replications");
    ci->add_option("--critval", o.critval, "Use this critical value instead of the simulated U_q quantile");
    ci->add_option("input", o.input, "Series file, '-' for stdin");
    add_seed(ci);
    add_workers(ci);
    add_cache(ci);

    auto* test = app.add_subcommand("test-noncorr", "Test that the first K autocorrelations vanish");
    test->add_option("--k", o.k, "Number of lags K");
    test->add_option("--method", o.test_method, "sn, lobato, nw");
    test->add_option("--alpha", o.alpha, "Significance level");
    test->add_option("--critval", o.critval, "Use this critical value");
    test->add_option("input", o.input, "Series file, '-' for stdin");
    add_seed(test);
    add_workers(test);
    add_cache(test);

    auto* crit = app.add_subcommand("critvals", "Simulated upper quantiles of U_q");
    crit->add_option("--q", o.q, "Dimension q");
    crit->add_option("--alpha", o.alphas, "Upper-tail probability (repeatable)");
    crit->add_option("--grid", o.grid, "Brownian discretisation steps");
    crit->add_option("--reps", o.sim_reps, "Replications");
    add_seed(crit);
    add_workers(crit);
    add_cache(crit);

    auto* sim = app.add_subcommand("simulate", "Run a table or figure experiment and print CSV");
    sim->add_option("--table", o.table, "1a 1b 2a 2b 3a 3b 4a 4b 5a 5b fig1 fig2 fig3 fig4")->required();
    sim->add_option("--scale", o.scale, "Fraction of the published replication count");
    sim->add_option("--output", o.output, "CSV file (default stdout)");
    add_seed(sim);
    add_workers(sim);
    add_cache(sim);

    auto* gen = app.add_subcommand("generate", "Simulate a series, one value per line");
    gen->add_option("--model", o.model, "iidn t6 lognorm onedep hetero nonmds garch bilinear m1..m9 ar1:RHO:INNOV")
        ->required();
    gen->add_option("--n", o.n, "Length")->required();
    add_seed(gen);
    add_workers(gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    const bool seed_given = o.seed.has_value();
    if (!seed_given) o.seed = crit->parsed() ? kDefaultCritvalSeed : fresh_seed();
    err << "# repro: " << repro_command(argc, argv, seed_given, *o.seed) << '\n';

    try {
        if (ci->parsed()) run_ci(o, in, out);
        else if (test->parsed()) run_test(o, in, out);
        else if (crit->parsed()) run_critvals(o, out);
        else if (sim->parsed()) run_simulate(o, out);
        else if (gen->parsed()) run_generate(o, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return e.is_numerical() ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace selfnorm::cli
