#pragma once

#include "tik/estimation.hpp"
#include "tik/probe_rdm.hpp"

// Closed-form backend for the decoupled-probe (large inter-impurity coupling)
// limit, with and without a control field along z. Probe levels:
//   E_S = -3K/4,  E_{T;m} = K/4 + m*B  for m in {+1, 0, -1}.

namespace tik {

struct LargeKParams {
    double temperature;  // T > 0
    double coupling;     // K, any sign
    double field = 0.0;  // B >= 0

    void validate() const;
};

// Boltzmann populations, computed with a max-energy shift so |K|/T up to
// ~700 stays finite.
ProbeState large_k_populations(const LargeKParams& p);

ProbeObservables large_k_observables(const LargeKParams& p);

// Analytic (T, K) population jacobian: d rho_i/dT = rho_i (E_i - <E>)/T^2,
// d rho_i/dK = -rho_i (dE_i/dK - <dE/dK>)/T.
PopulationJacobian large_k_population_jacobian(const LargeKParams& p,
                                               const std::vector<std::string>& unknowns);

// Thermometric QFI 3 e^{K/T} K^2 / ((3 + e^{K/T})^2 T^4), zero field.
double qfi_thermometry(double temperature, double coupling);

// Coupling QFI 3 e^{K/T} / ((3 + e^{K/T})^2 T^2), zero field.
double qfi_coupling(double temperature, double coupling);

// Universal single-parameter QSNR 3 e^y y^2 / (3 + e^y)^2 of y = K/T.
double qsnr_sp_universal(double y);

struct UniversalMax {
    double y;      // location of the maximum
    double value;  // QSNR at the maximum
};

// Maximum of qsnr_sp_universal over [y_lo, y_hi]: coarse scan (step 0.01)
// followed by golden-section refinement to 1e-8.
UniversalMax maximize_qsnr_sp(double y_lo, double y_hi);

// With-field multiparameter QSNRs as universal functions of t = T/B, k = K/B.
// Q_MP(T,T) uses the printed closed form; Q_MP(K,K) goes through the generic
// populations -> QFIM -> report pipeline (no closed form is published for it).
std::pair<double, double> qsnr_mp_universal(double t, double k);

// Printed closed form for Q_MP(T,T) alone (cross-checked against the pipeline).
double qsnr_mp_tt_closed_form(double t, double k);

// Two-parameter (T, K) QFIM at the given point, from analytic derivatives.
QfiMatrix large_k_qfim(const LargeKParams& p);

}  // namespace tik
