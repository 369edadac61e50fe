#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "selfnorm/core.hpp"

namespace selfnorm {

/// Data-generating processes used by the size, power and coverage studies.
///
/// Uncorrelated models: iid N(0,1); iid t(6); demeaned log-normal
/// exp(Z) - exp(1/2); X_t = u_t u_{t-1}; X_t = s_t u_t u_{t-1} with s_t the
/// period-12 pattern {1,1,1,2,3,1,1,1,1,2,4,6}; the non-martingale-difference
/// X_t = u_{t-2} u_{t-1} (u_{t-2} + u_t + 1); GARCH(1,1) with
/// sigma_t^2 = 0.001 + 0.02 X_{t-1}^2 + 0.8 sigma_{t-1}^2; bilinear
/// X_t = u_t + 0.5 u_{t-1} X_{t-2}.
///
/// ARMA family M1..M9 with innovations e1 ~ N(0,1), e2 = sqrt(0.6) t(5) and
/// e3 / sqrt(0.6), e3 ARCH(1) e3_t = u_t sqrt(0.5 e3_{t-1}^2 + 0.3); all three
/// have unit variance. M1-M3: AR(1) 0.7; M4-M6: MA(1) 0.8; M7-M9: AR(2)
/// (0.6, 0.35).
///
/// Ar1: X_t = rho X_{t-1} + e_t with normal, GARCH(1,1) or bilinear e_t.
struct ModelSpec {
    enum class Kind {
        IidNormal,
        IidT6,
        DemeanedLogNormal,
        OneDependent,
        Hetero12,
        NonMds,
        Garch11,
        Bilinear,
        ArmaFamily,
        Ar1,
    };
    enum class Innovation { Normal, Garch, Bilinear };

    Kind kind = Kind::IidNormal;
    int family = 0;  // 1..9 for ArmaFamily
    double rho = 0.0;
    Innovation innovation = Innovation::Normal;

    static ModelSpec arma(int index);
    static ModelSpec ar1(double rho, Innovation innovation);

    /// CLI names: iidn, t6, lognorm, onedep, hetero, nonmds, garch, bilinear,
    /// m1..m9, ar1:RHO:INNOV with INNOV in {normal, garch, bilinear}.
    static ModelSpec parse(std::string_view name);
    [[nodiscard]] std::string name() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline constexpr std::size_t kBurnIn = 1000;

/// n observations; recursive models discard a 1000-observation burn-in.
[[nodiscard]] TimeSeries generate(const ModelSpec& model, std::size_t n, RngStream& rng);

/// s_t of the heteroscedastic model, t = 1, 2, ...
[[nodiscard]] double hetero_scale(std::size_t t);

}  // namespace selfnorm
