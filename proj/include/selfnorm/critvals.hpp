#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace selfnorm {

/// Simulated upper quantiles of U_q = B_q(1)' V_q^{-1} B_q(1), where V_q is
/// the integrated outer product of the Brownian bridge B_q(r) - r B_q(1).
struct CritvalTable {
    std::size_t q = 1;
    std::size_t grid = 1000;
    std::size_t reps = 200000;
    std::uint64_t seed = 0;
    std::map<double, double> quantiles;  // alpha -> U_{q,alpha}
    std::size_t resamples = 0;           // replications redrawn for a singular V_q
    std::vector<double> sample;          // sorted draws, kept on request

    /// Throws InvalidArgument if alpha was not tabulated.
    [[nodiscard]] double at(double alpha) const;
};

inline constexpr std::uint64_t kDefaultCritvalSeed = 20090807;
inline constexpr std::size_t kDefaultGrid = 1000;

[[nodiscard]] std::size_t default_reps(std::size_t q) noexcept;
[[nodiscard]] std::vector<double> default_alphas();

/// One draw of U_q from q*grid standard normal increments, stored
/// component-major (component j occupies z[j*grid, (j+1)*grid)).
/// Throws NotPositiveDefinite if the discretised V_q is singular.
[[nodiscard]] double uq_from_increments(std::span<const double> z, std::size_t q, std::size_t grid);

/// Requires grid >= 100, reps >= 1000 and 1 <= q <= 20. Replication r draws
/// from its own counter-seeded stream, so the table does not depend on the
/// worker count. Fails if more than 0.1% of replications need redrawing.
[[nodiscard]] CritvalTable simulate_uq(std::size_t q, std::size_t grid, std::size_t reps, std::uint64_t seed,
                                       const std::vector<double>& alphas, bool keep_sample = false,
                                       unsigned workers = 0);

[[nodiscard]] std::string to_json(const CritvalTable& table);
[[nodiscard]] CritvalTable critval_table_from_json(const std::string& text);

/// Source of U_{q,alpha} for tests and intervals.
class CritvalSource {
public:
    virtual ~CritvalSource() = default;
    [[nodiscard]] virtual double critval(std::size_t q, double alpha) = 0;
};

/// Same value for every (q, alpha); +infinity is the "never reject" sentinel.
class FixedCritval final : public CritvalSource {
public:
    explicit FixedCritval(double value) : value_(value) {}
    [[nodiscard]] double critval(std::size_t, double) override { return value_; }

private:
    double value_;
};

/// Simulates tables on first use and persists them as one JSON file per
/// (q, grid, reps, seed) under `directory`. Thread-safe.
class CritvalCache final : public CritvalSource {
public:
    explicit CritvalCache(std::filesystem::path directory, std::uint64_t seed = kDefaultCritvalSeed,
                          std::size_t grid = kDefaultGrid, unsigned workers = 0);

    /// $SELFNORM_CRITVAL_CACHE, else $XDG_CACHE_HOME/selfnorm, else ~/.cache/selfnorm.
    static std::filesystem::path default_directory();

    [[nodiscard]] double critval(std::size_t q, double alpha) override;
    [[nodiscard]] CritvalTable table(std::size_t q, double alpha);
    [[nodiscard]] const std::filesystem::path& directory() const noexcept { return directory_; }

private:
    std::filesystem::path file_for(std::size_t q) const;

    std::filesystem::path directory_;
    std::uint64_t seed_;
    std::size_t grid_;
    unsigned workers_;
    std::mutex mutex_;
    std::map<std::size_t, CritvalTable> tables_;
};

}  // namespace selfnorm
