#include "tik/large_k.hpp"

#include <cmath>
#include <stdexcept>

namespace tik {

namespace {

// Level energies in the order (S, T+1, T0, T-1).
Eigen::Vector4d level_energies(double coupling, double field) {
    return {-0.75 * coupling, 0.25 * coupling + field, 0.25 * coupling,
            0.25 * coupling - field};
}

Eigen::Vector4d boltzmann(const Eigen::Vector4d& energies, double temperature) {
    const double shift = energies.minCoeff();
    Eigen::Vector4d w = (-(energies.array() - shift) / temperature).exp();
    return w / w.sum();
}

}  // namespace

void LargeKParams::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("LargeKParams: temperature must be positive");
    if (!std::isfinite(coupling) || !std::isfinite(field))
        throw std::invalid_argument("LargeKParams: non-finite coupling or field");
}

ProbeState large_k_populations(const LargeKParams& p) {
    p.validate();
    const Eigen::Vector4d w = boltzmann(level_energies(p.coupling, p.field), p.temperature);
    return {w[0], w[1], w[2], w[3]};
}

ProbeObservables large_k_observables(const LargeKParams& p) {
    return observables_of(large_k_populations(p));
}

PopulationJacobian large_k_population_jacobian(const LargeKParams& p,
                                               const std::vector<std::string>& unknowns) {
    p.validate();
    const Eigen::Vector4d e = level_energies(p.coupling, p.field);
    const Eigen::Vector4d rho = boltzmann(e, p.temperature);
    const Eigen::Vector4d de_dk{-0.75, 0.25, 0.25, 0.25};
    const double e_mean = rho.dot(e);
    const double dk_mean = rho.dot(de_dk);

    PopulationJacobian pj;
    pj.names = unknowns;
    pj.populations = rho;
    pj.derivs.resize(static_cast<Eigen::Index>(unknowns.size()), 4);
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
        for (int k = 0; k < 4; ++k) {
            if (unknowns[i] == "T")
                pj.derivs(static_cast<Eigen::Index>(i), k) =
                    rho[k] * (e[k] - e_mean) / (p.temperature * p.temperature);
            else if (unknowns[i] == "K")
                pj.derivs(static_cast<Eigen::Index>(i), k) =
                    -rho[k] * (de_dk[k] - dk_mean) / p.temperature;
            else
                throw std::invalid_argument("large_k_population_jacobian: unknown parameter " +
                                            unknowns[i]);
        }
    }
    return pj;
}

double qfi_thermometry(double temperature, double coupling) {
    const double y = coupling / temperature;
    // 3 e^y K^2 / ((3+e^y)^2 T^4) = 3 e^{-y} K^2 / ((3 e^{-y} + 1)^2 T^4) for y > 0
    const double t2 = temperature * temperature;
    if (y > 0.0) {
        const double em = std::exp(-y);
        const double d = 3.0 * em + 1.0;
        return 3.0 * em * coupling * coupling / (d * d * t2 * t2);
    }
    const double ep = std::exp(y);
    const double d = 3.0 + ep;
    return 3.0 * ep * coupling * coupling / (d * d * t2 * t2);
}

double qfi_coupling(double temperature, double coupling) {
    const double y = coupling / temperature;
    const double t2 = temperature * temperature;
    if (y > 0.0) {
        const double em = std::exp(-y);
        const double d = 3.0 * em + 1.0;
        return 3.0 * em / (d * d * t2);
    }
    const double ep = std::exp(y);
    const double d = 3.0 + ep;
    return 3.0 * ep / (d * d * t2);
}

double qsnr_sp_universal(double y) {
    if (y > 0.0) {
        const double em = std::exp(-y);
        const double d = 3.0 * em + 1.0;
        return 3.0 * em * y * y / (d * d);
    }
    const double ep = std::exp(y);
    const double d = 3.0 + ep;
    return 3.0 * ep * y * y / (d * d);
}

UniversalMax maximize_qsnr_sp(double y_lo, double y_hi) {
    if (!(y_lo < y_hi)) throw std::invalid_argument("maximize_qsnr_sp: empty bracket");
    // Coarse scan to bracket the maximum.
    double best_y = y_lo, best_v = qsnr_sp_universal(y_lo);
    for (double y = y_lo; y <= y_hi; y += 0.01) {
        const double v = qsnr_sp_universal(y);
        if (v > best_v) {
            best_v = v;
            best_y = y;
        }
    }
    double a = std::max(y_lo, best_y - 0.02);
    double b = std::min(y_hi, best_y + 0.02);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = qsnr_sp_universal(c), fd = qsnr_sp_universal(d);
    while (b - a > 1e-8) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = qsnr_sp_universal(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = qsnr_sp_universal(d);
        }
    }
    const double y = 0.5 * (a + b);
    return {y, qsnr_sp_universal(y)};
}

double qsnr_mp_tt_closed_form(double t, double k) {
    // Universal in t = T/B, k = K/B. Written with negative exponents so large
    // k/t (deep singlet) underflows to 0 instead of overflowing.
    if (1.0 / t > 300.0 || k / t > 700.0) return 0.0;
    const double e1 = std::exp(1.0 / t);
    const double e2 = e1 * e1;
    const double ek = std::exp(k / t);
    const double num = 2.0 * e2 * (2.0 + std::cosh(1.0 / t));
    const double den = (1.0 + e1 + e2) * (1.0 + e1 * (1.0 + e1 + ek)) * t * t;
    if (!std::isfinite(den)) return 0.0;
    return num / den;
}

QfiMatrix large_k_qfim(const LargeKParams& p) {
    return build_qfim(large_k_population_jacobian(p, {"T", "K"}));
}

std::pair<double, double> qsnr_mp_universal(double t, double k) {
    if (!(t > 0.0)) throw std::invalid_argument("qsnr_mp_universal: t must be positive");
    const LargeKParams p{t, k, 1.0};  // B = 1 by universality
    const QfiMatrix h = large_k_qfim(p);
    ParamVector params{{"T", "K"}, {t, k}};
    const QsnrReport rep = qsnr_report(params, h);
    return {rep.mp(0, 0), rep.mp(1, 1)};
}

}  // namespace tik
