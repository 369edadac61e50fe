#include "selfnorm/critvals.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "selfnorm/core.hpp"
#include "selfnorm/parallel.hpp"

namespace selfnorm {

namespace {

constexpr double kAlphaMatch = 1e-12;

std::optional<double> lookup(const std::map<double, double>& quantiles, double alpha) {
    for (const auto& [a, v] : quantiles) {
        if (std::abs(a - alpha) <= kAlphaMatch) return v;
    }
    return std::nullopt;
}

std::string alpha_key(double alpha) {
    std::ostringstream os;
    os.precision(15);
    os << alpha;
    return os.str();
}

}  // namespace

double CritvalTable::at(double alpha) const {
    if (auto v = lookup(quantiles, alpha)) return *v;
    throw Error(ErrorKind::InvalidArgument, "alpha " + alpha_key(alpha) + " not tabulated");
}

std::size_t default_reps(std::size_t q) noexcept { return q <= 5 ? 200000 : 50000; }

std::vector<double> default_alphas() { return {0.01, 0.025, 0.05, 0.10}; }

double uq_from_increments(std::span<const double> z, std::size_t q, std::size_t grid) {
    if (z.size() != q * grid) throw Error(ErrorKind::InvalidArgument, "increment count must be q * grid");
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid));
    const double gd = static_cast<double>(grid);
    if (q == 1) {
        double end = 0.0;
        for (double v : z) end += v;
        end *= scale;
        // Left Riemann sum over r = i/grid, i = 0..grid-1 (the i = 0 term is zero).
        double s = 0.0, v = 0.0;
        for (std::size_t i = 1; i < grid; ++i) {
            s += z[i - 1] * scale;
            const double b = s - (static_cast<double>(i) / gd) * end;
            v += b * b;
        }
        v /= gd;
        if (!(v > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "degenerate V_1");
        return end * end / v;
    }
    const auto qi = static_cast<Eigen::Index>(q);
    Vector end = Vector::Zero(qi);
    for (std::size_t j = 0; j < q; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < grid; ++i) s += z[j * grid + i];
        end[static_cast<Eigen::Index>(j)] = s * scale;
    }
    Vector walk = Vector::Zero(qi);
    Vector bridge(qi);
    SquareMatrix v = SquareMatrix::Zero(qi, qi);
    for (std::size_t i = 1; i < grid; ++i) {
        const double r = static_cast<double>(i) / gd;
        for (std::size_t j = 0; j < q; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            walk[jj] += z[j * grid + i - 1] * scale;
            bridge[jj] = walk[jj] - r * end[jj];
        }
        v.selfadjointView<Eigen::Lower>().rankUpdate(bridge);
    }
    const SquareMatrix full = v.selfadjointView<Eigen::Lower>();
    return inverse_quadratic_form(full / gd, end);
}

CritvalTable simulate_uq(std::size_t q, std::size_t grid, std::size_t reps, std::uint64_t seed,
                         const std::vector<double>& alphas, bool keep_sample, unsigned workers) {
    if (q < 1 || q > 20) throw Error(ErrorKind::InvalidArgument, "q must lie in [1, 20]");
    if (grid < 100) throw Error(ErrorKind::InvalidArgument, "grid must be at least 100");
    if (reps < 1000) throw Error(ErrorKind::InvalidArgument, "replications must be at least 1000");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
    }

    std::vector<double> draws(reps);
    std::vector<std::uint32_t> redraws(reps, 0);
    const std::size_t max_redraws = reps / 1000;
    std::atomic<std::size_t> total_redraws{0};

    parallel_for(reps, workers, [&](std::size_t r) {
        RngStream rng(seed, stream_index(q, r));
        std::vector<double> z(q * grid);
        for (;;) {
            for (auto& v : z) v = rng.normal();
            try {
                draws[r] = uq_from_increments(z, q, grid);
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
                ++redraws[r];
                if (total_redraws.fetch_add(1) + 1 > max_redraws) {
                    throw Error(ErrorKind::NotPositiveDefinite, "too many singular V_q draws");
                }
            }
        }
    });

    CritvalTable table;
    table.q = q;
    table.grid = grid;
    table.reps = reps;
    table.seed = seed;
    for (auto c : redraws) table.resamples += c;
    std::sort(draws.begin(), draws.end());
    for (double a : alphas) table.quantiles[a] = quantile_sorted(draws, 1.0 - a);
    if (keep_sample) table.sample = std::move(draws);
    return table;
}

std::string to_json(const CritvalTable& table) {
    nlohmann::ordered_json j;
    j["q"] = table.q;
    j["grid"] = table.grid;
    j["reps"] = table.reps;
    j["seed"] = table.seed;
    nlohmann::ordered_json qs = nlohmann::ordered_json::object();
    for (const auto& [a, v] : table.quantiles) qs[alpha_key(a)] = v;
    j["quantiles"] = qs;
    return j.dump();
}

CritvalTable critval_table_from_json(const std::string& text) {
    CritvalTable t;
    try {
        const auto j = nlohmann::json::parse(text);
        t.q = j.at("q").get<std::size_t>();
        t.grid = j.at("grid").get<std::size_t>();
        t.reps = j.at("reps").get<std::size_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : j.at("quantiles").items()) t.quantiles[std::stod(k)] = v.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed critical value table: ") + e.what());
    }
    return t;
}

CritvalCache::CritvalCache(std::filesystem::path directory, std::uint64_t seed, std::size_t grid, unsigned workers)
    : directory_(std::move(directory)), seed_(seed), grid_(grid), workers_(workers) {}

std::filesystem::path CritvalCache::default_directory() {
    if (const char* env = std::getenv("SELFNORM_CRITVAL_CACHE"); env != nullptr && *env != '\0') return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg != nullptr && *xdg != '\0') {
        return std::filesystem::path(xdg) / "selfnorm";
    }
    if (const char* home = std::getenv("HOME"); home != nullptr && *home != '\0') {
        return std::filesystem::path(home) / ".cache" / "selfnorm";
    }
    return ".selfnorm-cache";
}

std::filesystem::path CritvalCache::file_for(std::size_t q) const {
    std::ostringstream name;
    name << "uq_q" << q << "_grid" << grid_ << "_reps" << default_reps(q) << "_seed" << seed_ << ".json";
    return directory_ / name.str();
}

CritvalTable CritvalCache::table(std::size_t q, double alpha) {
    std::lock_guard lock(mutex_);
    if (auto it = tables_.find(q); it != tables_.end() && lookup(it->second.quantiles, alpha)) return it->second;

    const auto path = file_for(q);
    std::optional<CritvalTable> loaded;
    if (std::ifstream in(path); in) {
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            auto t = critval_table_from_json(buf.str());
            if (t.q == q && t.grid == grid_ && t.reps == default_reps(q) && t.seed == seed_) loaded = std::move(t);
        } catch (const Error&) {
            // unreadable cache entries are regenerated
        }
    }
    if (!loaded || !lookup(loaded->quantiles, alpha)) {
        auto alphas = default_alphas();
        if (loaded) {
            for (const auto& [a, v] : loaded->quantiles) alphas.push_back(a);
        }
        alphas.push_back(alpha);
        std::sort(alphas.begin(), alphas.end());
        alphas.erase(std::unique(alphas.begin(), alphas.end(),
                                 [](double a, double b) { return std::abs(a - b) <= kAlphaMatch; }),
                     alphas.end());
        loaded = simulate_uq(q, grid_, default_reps(q), seed_, alphas, false, workers_);
        std::error_code ec;
        std::filesystem::create_directories(directory_, ec);
        const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
        if (std::ofstream out(tmp); out) {
            out << to_json(*loaded) << '\n';
            out.close();
            std::filesystem::rename(tmp, path, ec);
        }
    }
    tables_[q] = std::move(*loaded);
    return tables_[q];
}

double CritvalCache::critval(std::size_t q, double alpha) {
    return table(q, alpha).at(alpha);
}

}  // namespace selfnorm
