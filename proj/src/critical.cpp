#include "tik/critical.hpp"

#include <cmath>
#include <stdexcept>

#include "tik/special_functions.hpp"

namespace tik {

void CriticalConstants::validate() const {
    if (!(t_k > 0.0)) throw std::invalid_argument("CriticalConstants: t_k must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("CriticalConstants: c must be positive");
    if (!(c_star > -0.75 && c_star < 0.25))
        throw std::invalid_argument("CriticalConstants: c_star out of (-3/4, 1/4)");
}

double t_star(double delta_k, const CriticalConstants& consts) {
    consts.validate();
    const double r = delta_k / consts.t_k;
    return consts.t_k * consts.c * r * r;
}

EntropyResult entropy_crossover(double temperature, double delta_k,
                                const CriticalConstants& consts) {
    consts.validate();
    if (!(temperature > 0.0))
        throw std::invalid_argument("entropy_crossover: temperature must be positive");
    const double half_ln2 = 0.5 * std::log(2.0);
    EntropyResult res{half_ln2, temperature > 0.1 * consts.t_k};
    const double ts = t_star(delta_k, consts);
    if (ts == 0.0) return res;  // t -> infinity limit: Sbar = 0
    const double inv_t = ts / temperature;  // 1/t
    const double x = 0.5 + inv_t;
    if (x >= 100.0) {
        // Deep crossover: the direct expression is a near-total cancellation
        // (S -> 0), so evaluate the asymptotic expansion of
        // Sbar(t) + (1/2) ln 2 in 1/x instead (relative error < 1e-13 here).
        const double r = 1.0 / x;
        res.value = r * (1.0 / 12.0 +
                    r * (1.0 / 24.0 +
                    r * (1.0 / 90.0 +
                    r * (-1.0 / 240.0 +
                    r * (-1.0 / 210.0 +
                    r * (1.0 / 504.0))))));
        return res;
    }
    const double half_ln_pi = 0.5 * std::log(3.14159265358979323846);
    res.value = half_ln2 + inv_t * (digamma(x) - 1.0) - (ln_gamma(x) - half_ln_pi);
    return res;
}

double critical_phi(double temperature, double coupling, const CriticalConstants& consts) {
    consts.validate();
    if (!(temperature > 0.0))
        throw std::invalid_argument("critical_phi: temperature must be positive");
    const double dk = coupling - consts.k_c;
    return 0.5 + consts.c * dk * dk / (temperature * consts.t_k);
}

double dc_dt(double temperature, double coupling, const CriticalConstants& consts) {
    const double phi = critical_phi(temperature, coupling, consts);
    const double dk = coupling - consts.k_c;
    const double t_tk = temperature * consts.t_k;
    return 2.0 * consts.c * dk * (t_tk - consts.c * dk * dk * trigamma(phi)) /
           (temperature * temperature * consts.t_k * consts.t_k);
}

double correlator(double temperature, double coupling, const CriticalConstants& consts) {
    const double phi = critical_phi(temperature, coupling, consts);
    const double dk = coupling - consts.k_c;
    return 2.0 * consts.c * dk * (std::log(temperature) + digamma(phi)) / consts.t_k +
           consts.c_star;
}

double dc_dk(double temperature, double coupling, const CriticalConstants& consts) {
    const double phi = critical_phi(temperature, coupling, consts);
    const double dk = coupling - consts.k_c;
    const double t_tk = temperature * consts.t_k;
    return 2.0 * consts.c *
           (t_tk * (std::log(temperature) + digamma(phi)) +
            2.0 * consts.c * dk * dk * trigamma(phi)) /
           (temperature * consts.t_k * consts.t_k);
}

std::pair<double, double> qsnr_critical(double temperature, double coupling,
                                        const CriticalConstants& consts) {
    const double phi = critical_phi(temperature, coupling, consts);
    const double corr = correlator(temperature, coupling, consts);
    if (!(corr > -0.75 && corr < 0.25))
        throw std::domain_error(
            "qsnr_critical: correlator outside (-3/4, 1/4) -- outside universal regime");
    const double dk = coupling - consts.k_c;
    const double t_tk = temperature * consts.t_k;
    const double tk2 = consts.t_k * consts.t_k;
    const double denom = temperature * temperature * tk2 * tk2 *
                         (0.25 - corr) * (0.75 + corr);
    const double num_t = t_tk - consts.c * dk * dk * trigamma(phi);
    const double q_t = 4.0 * consts.c * consts.c * dk * dk * num_t * num_t / denom;
    const double num_k = t_tk * (std::log(temperature) + digamma(phi)) +
                         2.0 * consts.c * dk * dk * trigamma(phi);
    const double q_k = 4.0 * consts.c * consts.c * coupling * coupling * num_k * num_k / denom;
    return {q_t, q_k};
}

}  // namespace tik
