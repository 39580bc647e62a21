#pragma once

#include <string>
#include <vector>

#include "tik/estimation.hpp"

// Wilson-chain NRG for the full two-impurity Kondo model
//   H = K S_L.S_R + sum_a [ J S_a.s_0a + sum_n t_n (f+_na f_n+1,a + h.c.) ]
//       + B Sz_tot,
// flat band of halfwidth D, two identical channels. Iterative diagonalization
// in (total charge Q, total 2Sz) blocks with interleaved single-site growth
// (L then R each shell), truncation to the lowest kept_states with
// degenerate-multiplet completion, and shell-local canonical thermodynamics at
// T_n = w D Lambda^{-(n-1)/2}. The impurity entropy subtracts a cached
// impurity-free reference chain.

namespace tik {

struct NrgConfig {
    double lambda = 3.0;               // discretization parameter, in (1, 10]
    int kept_states = 1500;            // truncation count N_s >= 100
    int chain_length = 50;             // number of Wilson shells N >= 10
    double band_halfwidth = 1.0;       // D
    // w in T_n = w D Lambda^{-(n-1)/2}.  The default keeps the canonical sums
    // converged inside the kept-state energy window at N_s = 1500: with
    // w = 0.5 the window-to-temperature ratio is only ~2.7 and the truncated
    // Boltzmann tail depresses the local-moment entropy plateau by ~0.19;
    // w = 0.25 restores 2 ln 2 to within 0.02.
    double temperature_prefactor = 0.25;

    void validate() const;
    double shell_temperature(int n) const;
};

// Hopping coefficients t_0 .. t_{N-1}:
// t_n = (D/2)(1 + 1/Lambda) Lambda^{-n/2} xi_n,
// xi_n = (1 - Lambda^{-n-1}) / sqrt((1 - Lambda^{-2n-1})(1 - Lambda^{-2n-3})).
std::vector<double> wilson_chain(const NrgConfig& config);

struct FlowRow {
    int shell = 0;
    double temperature = 0.0;
    double entropy_total = 0.0;  // shell-local canonical entropy
    double entropy_imp = 0.0;    // minus the free-chain reference
    double correlator = 0.0;     // <S_L.S_R> at T_n
};

struct NrgRun {
    double coupling = 0.0;  // K
    double exchange = 0.0;  // J
    double field = 0.0;     // B
    std::vector<FlowRow> flow;  // one row per completed shell
};

struct RunOptions {
    int max_shell = -1;       // default: config.chain_length
    bool early_stop = false;  // stop once S_imp ~ 0 and C has converged
};

// Full NRG run; throws std::runtime_error on block-dimension overflow
// (resource error; message carries the shell index).
NrgRun nrg_run(const NrgConfig& config, double coupling, double exchange,
               double field, const RunOptions& opts = {});

// Kondo temperature from the S_imp = ln 2 crossing of a 2ln2 -> 0 flow,
// log-linear interpolation in T. Throws if the flow never crosses.
double tk_from_flow(const NrgRun& run);

// T_K at K = 0 (two decoupled single-channel Kondo models).
double estimate_tk(double exchange, const NrgConfig& config);

// Two-shell moving average of a flow at the geometric-mean temperatures;
// damps the even-odd discretization oscillation of S_imp.
std::vector<FlowRow> smoothed_flow(const NrgRun& run);

// Temperature of the last downward crossing of S_imp through `level`,
// log-linear in T; NaN when the flow never crosses.
double crossing_temperature(const std::vector<FlowRow>& flow, double level);

// Critical coupling inside [k_lo, k_hi] by golden-section maximization of
// the departure score: the depth (in -ln T) at which the smoothed S_imp flow
// leaves the 1/2 ln 2 band. The crossover scale T* vanishes at K_c, so the
// score peaks there (the "latest departure shell" criterion). Both bracket
// endpoints must leave the plateau within the chain; flows still on the
// plateau at the last shell are inside the chain-length resolution interval
// and terminate the search at its midpoint. Stops at interval width
// width_fraction * t_k.
double tune_kc(double exchange, const NrgConfig& config, double k_lo, double k_hi,
               double t_k, double width_fraction = 1e-3);

struct CriticalFit {
    double k_c = 0.0;
    double t_k = 0.0;
    double c = 0.0;       // crossover constant in T*/T_K = c (dK/T_K)^2
    double c_star = 0.0;  // critical correlator
};

// T_K, K_c, c and C* from NRG flows at the given exchange; c is extracted
// from the T* entropy-crossover crossing S = (1/2)ln2 + Sbar(1) at several
// detunings dK, c_star from the late-shell plateau of the tuned-K_c flow.
CriticalFit extract_critical_constants(double exchange, const NrgConfig& config,
                                       double k_lo, double k_hi,
                                       double width_fraction = 1e-3);

struct WindowPoint {
    double temperature = 0.0;
    double delta_k = 0.0;
    double c_nrg = 0.0;
    double dc_dt_nrg = 0.0;
    double dc_dk_nrg = 0.0;
};

// NRG dC/dT (shell differencing in ln T of C(K_c+dK) - C(K_c); the K_c
// background cancels the shell-local discretization artifact and carries no
// dC/dT of its own) and dC/dK (central K differences, step dK/2) on the
// universal window dK/T_K in [1e-3, 1e-2], T/T_K in [1e-4, 1e-2], for
// comparison against the critical-region analytics.
std::vector<WindowPoint> nrg_window_scan(double exchange, const NrgConfig& config,
                                         const CriticalFit& fit,
                                         const std::vector<double>& dk_fractions);

struct MetrologyRow {
    int shell = 0;
    double temperature = 0.0;
    double coupling = 0.0;
    double correlator = 0.0;
    double dc_dt = 0.0;
    double dc_dk = 0.0;
    double qfi_t = 0.0;   // Eq. (18) scalar form
    double qfi_k = 0.0;
    double qsnr_t = 0.0;
    double qsnr_k = 0.0;
    bool resolution_warning = false;  // finite-difference noise estimate > 10%
};

// Zero-field metrology grid: one NRG run per K value; dC/dK by central
// differences across the K grid (ends one-sided), dC/dT across adjacent
// shells; QFIs via the zero-field scalar form.
std::vector<MetrologyRow> nrg_metrology(double exchange, const NrgConfig& config,
                                        const std::vector<double>& k_values);

}  // namespace tik
