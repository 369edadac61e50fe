#include "selfnorm/dgp.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace selfnorm {

namespace {

constexpr std::array<double, 12> kHeteroPattern{1, 1, 1, 2, 3, 1, 1, 1, 1, 2, 4, 6};

constexpr double kGarchOmega = 0.001;
constexpr double kGarchArch = 0.02;
constexpr double kGarchPersistence = 0.8;
constexpr double kBilinear = 0.5;

// Stateful innovation generators; each call returns the next e_t.
class GarchInnovation {
public:
    double next(RngStream& rng) {
        const double sigma2 = kGarchOmega + kGarchArch * prev_ * prev_ + kGarchPersistence * prev_sigma2_;
        prev_ = rng.normal() * std::sqrt(sigma2);
        prev_sigma2_ = sigma2;
        return prev_;
    }

private:
    double prev_ = 0.0;
    double prev_sigma2_ = kGarchOmega / (1.0 - kGarchArch - kGarchPersistence);
};

class BilinearInnovation {
public:
    double next(RngStream& rng) {
        const double u = rng.normal();
        const double x = u + kBilinear * u_prev_ * x_prev2_;
        x_prev2_ = x_prev1_;
        x_prev1_ = x;
        u_prev_ = u;
        return x;
    }

private:
    double u_prev_ = 0.0;
    double x_prev1_ = 0.0;
    double x_prev2_ = 0.0;
};

class ArchInnovation {
public:
    // Unit-variance ARCH(1): e_t / sqrt(0.6).
    double next(RngStream& rng) {
        prev_ = rng.normal() * std::sqrt(0.5 * prev_ * prev_ + 0.3);
        return prev_ / std::sqrt(0.6);
    }

private:
    double prev_ = 0.0;
};

std::vector<double> keep_tail(std::vector<double> path, std::size_t n) {
    return std::vector<double>(path.end() - static_cast<std::ptrdiff_t>(n), path.end());
}

std::vector<double> arma_family(int index, std::size_t n, RngStream& rng) {
    const int innovation = (index - 1) % 3;  // 0 normal, 1 t(5), 2 ARCH
    ArchInnovation arch;
    auto next_innovation = [&]() -> double {
        switch (innovation) {
            case 0: return rng.normal();
            case 1: return std::sqrt(0.6) * rng.student_t(5.0);
            default: return arch.next(rng);
        }
    };
    const std::size_t total = n + kBurnIn;
    std::vector<double> x(total);
    double e_prev = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
        const double e = next_innovation();
        const double x1 = t >= 1 ? x[t - 1] : 0.0;
        const double x2 = t >= 2 ? x[t - 2] : 0.0;
        if (index <= 3) {
            x[t] = 0.7 * x1 + e;
        } else if (index <= 6) {
            x[t] = e + 0.8 * e_prev;
        } else {
            x[t] = 0.6 * x1 + 0.35 * x2 + e;
        }
        e_prev = e;
    }
    return keep_tail(std::move(x), n);
}

std::vector<double> ar1(double rho, ModelSpec::Innovation innovation, std::size_t n, RngStream& rng) {
    GarchInnovation garch;
    BilinearInnovation bilinear;
    const std::size_t total = n + kBurnIn;
    std::vector<double> x(total);
    double prev = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
        double e = 0.0;
        switch (innovation) {
            case ModelSpec::Innovation::Normal: e = rng.normal(); break;
            case ModelSpec::Innovation::Garch: e = garch.next(rng); break;
            case ModelSpec::Innovation::Bilinear: e = bilinear.next(rng); break;
        }
        prev = rho * prev + e;
        x[t] = prev;
    }
    return keep_tail(std::move(x), n);
}

const char* innovation_name(ModelSpec::Innovation i) {
    switch (i) {
        case ModelSpec::Innovation::Normal: return "normal";
        case ModelSpec::Innovation::Garch: return "garch";
        case ModelSpec::Innovation::Bilinear: return "bilinear";
    }
    return "normal";
}

}  // namespace

double hetero_scale(std::size_t t) {
    if (t == 0) throw Error(ErrorKind::InvalidArgument, "hetero_scale is 1-based");
    return kHeteroPattern[(t - 1) % kHeteroPattern.size()];
}

ModelSpec ModelSpec::arma(int index) {
    if (index < 1 || index > 9) throw Error(ErrorKind::InvalidArgument, "model index must be 1..9");
    ModelSpec m;
    m.kind = Kind::ArmaFamily;
    m.family = index;
    return m;
}

ModelSpec ModelSpec::ar1(double rho, Innovation innovation) {
    if (!(std::abs(rho) < 1.0)) throw Error(ErrorKind::InvalidArgument, "AR(1) coefficient must satisfy |rho| < 1");
    ModelSpec m;
    m.kind = Kind::Ar1;
    m.rho = rho;
    m.innovation = innovation;
    return m;
}

ModelSpec ModelSpec::parse(std::string_view name) {
    ModelSpec m;
    if (name == "iidn") return m;
    if (name == "t6") { m.kind = Kind::IidT6; return m; }
    if (name == "lognorm") { m.kind = Kind::DemeanedLogNormal; return m; }
    if (name == "onedep") { m.kind = Kind::OneDependent; return m; }
    if (name == "hetero") { m.kind = Kind::Hetero12; return m; }
    if (name == "nonmds") { m.kind = Kind::NonMds; return m; }
    if (name == "garch") { m.kind = Kind::Garch11; return m; }
    if (name == "bilinear") { m.kind = Kind::Bilinear; return m; }
    if (name.size() == 2 && name[0] == 'm' && name[1] >= '1' && name[1] <= '9') return arma(name[1] - '0');
    if (name.starts_with("ar1:")) {
        const auto rest = name.substr(4);
        const auto colon = rest.find(':');
        const auto rho_text = rest.substr(0, colon);
        double rho = 0.0;
        const auto res = std::from_chars(rho_text.data(), rho_text.data() + rho_text.size(), rho);
        if (res.ec != std::errc() || res.ptr != rho_text.data() + rho_text.size()) {
            throw Error(ErrorKind::Parse, "cannot parse AR coefficient in '" + std::string(name) + "'");
        }
        Innovation innov = Innovation::Normal;
        if (colon != std::string_view::npos) {
            const auto in = rest.substr(colon + 1);
            if (in == "garch") innov = Innovation::Garch;
            else if (in == "bilinear") innov = Innovation::Bilinear;
            else if (in != "normal") throw Error(ErrorKind::Parse, "unknown innovation '" + std::string(in) + "'");
        }
        return ar1(rho, innov);
    }
    throw Error(ErrorKind::Parse, "unknown model '" + std::string(name) + "'");
}

std::string ModelSpec::name() const {
    switch (kind) {
        case Kind::IidNormal: return "iidn";
        case Kind::IidT6: return "t6";
        case Kind::DemeanedLogNormal: return "lognorm";
        case Kind::OneDependent: return "onedep";
        case Kind::Hetero12: return "hetero";
        case Kind::NonMds: return "nonmds";
        case Kind::Garch11: return "garch";
        case Kind::Bilinear: return "bilinear";
        case Kind::ArmaFamily: return "m" + std::to_string(family);
        case Kind::Ar1: {
            std::ostringstream os;
            os << "ar1:" << rho << ':' << innovation_name(innovation);
            return os.str();
        }
    }
    return "unknown";
}

TimeSeries generate(const ModelSpec& model, std::size_t n, RngStream& rng) {
    if (n < 2) throw Error(ErrorKind::TooShort, "need n >= 2", n);
    std::vector<double> x(n);
    switch (model.kind) {
        case ModelSpec::Kind::IidNormal:
            for (auto& v : x) v = rng.normal();
            break;
        case ModelSpec::Kind::IidT6:
            for (auto& v : x) v = rng.student_t(6.0);
            break;
        case ModelSpec::Kind::DemeanedLogNormal:
            for (auto& v : x) v = std::exp(rng.normal()) - std::exp(0.5);
            break;
        case ModelSpec::Kind::OneDependent:
        case ModelSpec::Kind::Hetero12: {
            double u_prev = rng.normal();
            for (std::size_t t = 1; t <= n; ++t) {
                const double u = rng.normal();
                const double s = model.kind == ModelSpec::Kind::Hetero12 ? hetero_scale(t) : 1.0;
                x[t - 1] = s * u * u_prev;
                u_prev = u;
            }
            break;
        }
        case ModelSpec::Kind::NonMds: {
            double u2 = rng.normal();
            double u1 = rng.normal();
            for (std::size_t t = 0; t < n; ++t) {
                const double u = rng.normal();
                x[t] = u2 * u1 * (u2 + u + 1.0);
                u2 = u1;
                u1 = u;
            }
            break;
        }
        case ModelSpec::Kind::Garch11:
            x = ar1(0.0, ModelSpec::Innovation::Garch, n, rng);
            break;
        case ModelSpec::Kind::Bilinear:
            x = ar1(0.0, ModelSpec::Innovation::Bilinear, n, rng);
            break;
        case ModelSpec::Kind::ArmaFamily:
            x = arma_family(model.family, n, rng);
            break;
        case ModelSpec::Kind::Ar1:
            x = ar1(model.rho, model.innovation, n, rng);
            break;
    }
    return TimeSeries(std::move(x));
}

}  // namespace selfnorm
