#pragma once

#include <utility>

// Exact analytics near the 2IK critical point: the crossover scale T*, the
// entropy flow along the crossover, the impurity spin-spin correlator C and
// its T/K derivatives (via the Maxwell relation), and the critical QSNRs.
//
// Note: log T in the correlator and in dc_dk uses T in the same (band, D = 1)
// units the constants were extracted in; the formulas are not scale-invariant
// in isolation.

namespace tik {

struct CriticalConstants {
    double k_c = 0.618;     // critical coupling K_c
    double t_k = 0.362;     // Kondo temperature T_K
    double c = 0.035;       // dimensionless constant in T*/T_K = c (dK/T_K)^2
    double c_star = -0.385; // critical correlator C*

    void validate() const;
};

// Crossover scale T* = T_K * c * (delta_k / T_K)^2.
double t_star(double delta_k, const CriticalConstants& consts);

struct EntropyResult {
    double value;          // impurity entropy S
    bool outside_window;   // set when T > 0.1 * T_K (validity warning, not error)
};

// S = (1/2) ln 2 + Sbar(T/T*), Sbar(t) = (1/t)[psi(1/2 + 1/t) - 1]
//                                       - ln[Gamma(1/2 + 1/t)/sqrt(pi)].
// T* = 0 is the t -> infinity limit: S = (1/2) ln 2 exactly.
EntropyResult entropy_crossover(double temperature, double delta_k,
                                const CriticalConstants& consts);

// Phi(T, K) = 1/2 + T*/T = 1/2 + c dK^2 / (T T_K).
double critical_phi(double temperature, double coupling, const CriticalConstants& consts);

// dC/dT = 2 c dK [T T_K - c dK^2 psi'(Phi)] / (T^2 T_K^2).
double dc_dt(double temperature, double coupling, const CriticalConstants& consts);

// C = 2 c dK [ln T + psi(Phi)] / T_K + C*.
double correlator(double temperature, double coupling, const CriticalConstants& consts);

// dC/dK = 2 c [T T_K (ln T + psi(Phi)) + 2 c dK^2 psi'(Phi)] / (T T_K^2).
double dc_dk(double temperature, double coupling, const CriticalConstants& consts);

// Printed closed forms for the critical QSNRs {Q_SP(T), Q_SP(K)}; identical to
// lambda^2 (d_lambda C)^2 / ((1/4 - C)(3/4 + C)). Throws if C leaves the
// physical range (-3/4, 1/4), i.e. outside the universal regime.
std::pair<double, double> qsnr_critical(double temperature, double coupling,
                                        const CriticalConstants& consts);

}  // namespace tik
