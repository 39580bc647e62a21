// Acceptance suite: exercises every top-level claim of the toolkit end to
// end and prints exactly one pass/fail line per criterion. Returns the
// number of failed criteria. The NRG criteria (8-10) run at the desk scale
// (Lambda = 3, N_s = 1500) and take ~25 minutes on one core; criteria 9 and
// 10 share the J = 1 critical-constant extraction.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "tik/critical.hpp"
#include "tik/estimation.hpp"
#include "tik/large_k.hpp"
#include "tik/narrow_band.hpp"
#include "tik/nrg.hpp"
#include "tik/probe_rdm.hpp"
#include "tik/special_functions.hpp"

using namespace tik;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// --- criterion 1: large-K QSNR maxima ---------------------------------------

void criterion_1() {
    const double t0 = now_s();
    const UniversalMax pos = maximize_qsnr_sp(0.1, 50.0);
    const UniversalMax neg = maximize_qsnr_sp(-50.0, -0.1);
    const double dt = now_s() - t0;
    const bool pass = std::abs(pos.y - 2.85) <= 0.06 &&
                      std::abs(pos.value - 1.00) <= 0.05 &&
                      std::abs(neg.y + 2.16) <= 0.05 &&
                      std::abs(neg.value - 0.167) <= 0.005 && dt < 1.0;
    report(1, pass,
           fmt("large-K maxima: Q=%.4f at y=%.4f (K>0), Q=%.4f at y=%.4f "
               "(K<0), %.2fs",
               pos.value, pos.y, neg.value, neg.y, dt));
}

// --- criterion 2: Q_SP(T) = Q_SP(K) at B = 0 ---------------------------------

void criterion_2() {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = std::pow(10.0, -2.0 + 3.0 * i / 99.0);
        for (int j = 0; j < 100; ++j) {
            const double mag = std::pow(10.0, -2.0 + 3.0 * (j % 50) / 49.0);
            const double k = (j < 50) ? mag : -mag;
            const double qt = t * t * qfi_thermometry(t, k);
            const double qk = k * k * qfi_coupling(t, k);
            const double scale = std::max({qt, qk, 1e-300});
            worst = std::max(worst, std::abs(qt - qk) / scale);
        }
    }
    report(2, worst <= 1e-12,
           fmt("QSNR equivalence on 100x100 (T,K) grid: worst rel err %.2e",
               worst));
}

// --- criterion 3: degradation identity and nested bound ----------------------

void criterion_3() {
    const double t0 = now_s();
    std::mt19937 rng(7);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst_deg = 0.0, worst_nest = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        // Random nonsingular PSD 2x2: degradation identity.
        Eigen::Matrix2d a;
        for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = nd(rng);
        const Eigen::Matrix2d h2 = a * a.transpose() + 1e-3 * Eigen::Matrix2d::Identity();
        const QfiMatrix q2({"a", "b"}, h2);
        ParamVector pv{{"a", "b"}, {1.3, 0.7}};
        const QsnrReport rep = qsnr_report(pv, q2);
        const double one_minus_cor2 =
            1.0 - rep.correlation(0, 1) * rep.correlation(0, 1);
        for (int i = 0; i < 2; ++i)
            worst_deg = std::max(
                worst_deg, std::abs(rep.mp(i, i) / rep.sp[i] / one_minus_cor2 - 1.0));

        // Nested bound on 2x2 and 3x3: (H^-1)_ii >= 1/H_ii.
        for (int n : {2, 3}) {
            Eigen::MatrixXd b(n, n);
            for (int i = 0; i < n * n; ++i) b(i / n, i % n) = nd(rng);
            const Eigen::MatrixXd h =
                b * b.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);
            std::vector<std::string> names(n);
            for (int i = 0; i < n; ++i) names[i] = "p" + std::to_string(i);
            const auto inv = invert_qfim(QfiMatrix(names, h));
            if (!inv) continue;
            for (int i = 0; i < n; ++i)
                worst_nest = std::max(worst_nest, 1.0 / h(i, i) - (*inv)(i, i));
        }
    }
    const double dt = now_s() - t0;
    report(3, worst_deg <= 1e-10 && worst_nest <= 1e-12 && dt < 1.0,
           fmt("degradation identity worst %.2e (tol 1e-10), nested-bound "
               "violation %.2e (tol 1e-12), %.2fs",
               worst_deg, worst_nest, dt));
}

// --- criterion 4: zero-field QFIM singularity, lifted by a field -------------

void criterion_4() {
    bool pass = true;
    std::string why;

    auto check_report = [&](const QfiMatrix& h, const QsnrReport& rep, double field,
                            const char* tag) {
        const double norm2 = h.elements().squaredNorm();
        if (field == 0.0) {
            if (std::abs(h.determinant()) > 1e-12 * norm2 || !rep.singular)
                pass = false, why = fmt("%s: B=0 QFIM not singular", tag);
            for (int i = 0; i < rep.mp.rows() && pass; ++i)
                if (rep.mp(i, i) != 0.0)
                    pass = false, why = fmt("%s: nonzero Q_MP at B=0", tag);
        } else {
            if (!(h.determinant() > 0.0))
                pass = false, why = fmt("%s: det <= 0 at B=0.5", tag);
            for (int i = 0; i < rep.mp.rows() && pass; ++i)
                if (!(rep.mp(i, i) > 0.0 && rep.mp(i, i) <= rep.sp[i] * (1 + 1e-12)))
                    pass = false, why = fmt("%s: Q_MP out of (0, Q_SP]", tag);
        }
    };

    // T >= 0.1 keeps all four probe levels thermally populated across the K
    // grid; below that the frozen-out level makes K unmeasurable and the QFIM
    // is legitimately singular even at B > 0.
    for (double field : {0.0, 0.5}) {
        for (int i = 0; i < 20 && pass; ++i) {
            const double t = std::pow(10.0, -1.0 + 1.7 * i / 19.0);
            for (int j = 0; j < 20 && pass; ++j) {
                const double k = -2.0 + 4.0 * j / 19.0 + 0.05;  // avoid K = 0
                const LargeKParams p{t, k, field};
                const PopulationJacobian pj =
                    large_k_population_jacobian(p, {"T", "K"});
                const QfiMatrix h = build_qfim(pj);
                // Points past the population noise floor report divergent
                // (+inf) QFI by design; the singularity statement concerns
                // the finite regime.
                if (h.has_divergent_diagonal()) continue;
                const QsnrReport rep =
                    qsnr_report(ParamVector{{"T", "K"}, {t, k}}, h);
                check_report(h, rep, field, "large-K");
            }
        }
        // NBL populations are finite-differenced; below T ~ 0.1 the T row is
        // dominated by difference noise and the rank classification is
        // meaningless, so the grid starts there.
        for (int i = 0; i < 6 && pass; ++i) {
            const double t = std::pow(10.0, -1.0 + 1.3 * i / 5.0);
            for (double k : {-1.0, -0.3, 0.3, 1.0}) {
                const NblParams p{t, k, 1.0, field};
                const auto [h, rep] = nbl_metrology(p, {"T", "K"});
                if (h.has_divergent_diagonal()) continue;
                check_report(h, rep, field, "NBL");
                if (!pass) break;
            }
        }
    }
    report(4, pass,
           pass ? "zero-field (T,K) QFIM singular with Q_MP = 0 on large-K and "
                  "NBL grids; B = 0.5 restores 0 < Q_MP <= Q_SP"
                : why);
}

// --- criterion 5: universal Q_MP(T,T) closed form and rescaling invariance ---

void criterion_5() {
    std::mt19937 rng(11);
    // t, k within a decade of 1 keeps every population above the noise floor.
    std::uniform_real_distribution<double> ue(-0.7, 0.7), us(-2.0, 2.0);
    std::bernoulli_distribution sign(0.5);
    double worst_form = 0.0, worst_scale = 0.0;

    auto mp_tt = [](double temperature, double coupling, double field) {
        const LargeKParams p{temperature, coupling, field};
        const PopulationJacobian pj = large_k_population_jacobian(p, {"T", "K"});
        const QsnrReport rep = qsnr_report(
            ParamVector{{"T", "K"}, {temperature, coupling}}, build_qfim(pj));
        return rep.mp(0, 0);
    };

    for (int i = 0; i < 10000; ++i) {
        const double t = std::pow(10.0, ue(rng));
        const double k = (sign(rng) ? 1.0 : -1.0) * std::pow(10.0, ue(rng));
        const double closed = qsnr_mp_tt_closed_form(t, k);
        const double assembled = mp_tt(t, k, 1.0);
        worst_form = std::max(worst_form, std::abs(assembled / closed - 1.0));
        const double s = std::pow(10.0, us(rng));
        const double rescaled = mp_tt(s * t, s * k, s);
        worst_scale = std::max(worst_scale, std::abs(rescaled / assembled - 1.0));
    }
    report(5, worst_form <= 1e-10 && worst_scale <= 1e-10,
           fmt("universal Q_MP(T,T): closed form vs pipeline worst %.2e, "
               "rescaling invariance worst %.2e (tol 1e-10)",
               worst_form, worst_scale));
}

// --- criterion 6: NBL -> large-K oracle at J -> 0, Maxwell relation ----------

void criterion_6() {
    const double t0 = now_s();
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ut(-1.0, 0.3), uk(-1.0, 0.3);
    std::bernoulli_distribution sign(0.5);
    double worst_obs = 0.0, worst_q = 0.0, worst_maxwell = 0.0;

    for (int i = 0; i < 20; ++i) {
        const double t = std::pow(10.0, ut(rng));
        const double k = (sign(rng) ? 1.0 : -1.0) * std::pow(10.0, uk(rng));

        const NblParams np{t, k, 1e-6, 0.0};
        const ProbeObservables nbl = nbl_observables(np);
        const ProbeObservables ora = large_k_observables({t, k, 0.0});
        worst_obs = std::max(worst_obs,
                             std::abs(nbl.c - ora.c) / std::max(std::abs(ora.c), 1e-3));

        const auto [h, rep] = nbl_metrology(np, {"T", "K"});
        (void)h;
        const double qt_ref = t * t * qfi_thermometry(t, k);
        const double qk_ref = k * k * qfi_coupling(t, k);
        worst_q = std::max(worst_q, std::abs(rep.sp[0] / qt_ref - 1.0));
        worst_q = std::max(worst_q, std::abs(rep.sp[1] / qk_ref - 1.0));

        // Maxwell relation d_T C = -d_K S by central differences.
        const double ht = 1e-4 * t, hk = 1e-4 * std::max(std::abs(k), 1.0);
        const double dct = (nbl_observables({t + ht, k, 1e-6, 0.0}).c -
                            nbl_observables({t - ht, k, 1e-6, 0.0}).c) /
                           (2.0 * ht);
        const double dsk = (nbl_entropy({t, k + hk, 1e-6, 0.0}) -
                            nbl_entropy({t, k - hk, 1e-6, 0.0})) /
                           (2.0 * hk);
        worst_maxwell = std::max(worst_maxwell, std::abs(dct + dsk));
    }
    const double dt = now_s() - t0;
    report(6, worst_obs <= 1e-6 && worst_q <= 1e-6 && worst_maxwell <= 1e-5 && dt < 10.0,
           fmt("NBL at J=1e-6 vs large-K: C worst %.2e, QSNR worst %.2e (tol "
               "1e-6), Maxwell worst %.2e (tol 1e-5), %.2fs",
               worst_obs, worst_q, worst_maxwell, dt));
}

// --- criterion 7: critical-region limits, identities, asymptotic fit ---------

void criterion_7() {
    const double t0 = now_s();
    const CriticalConstants cc{};
    bool pass = true;
    std::string why;

    // Sbar limits: S -> (1/2)ln2 as T/T* -> inf, S -> 0 as T/T* -> 0.
    const double half_ln2 = 0.5 * std::log(2.0);
    const double dk = 1e-3 * cc.t_k, ts = t_star(dk, cc);
    if (entropy_crossover(1e-5, 0.0, cc).value != half_ln2 ||
        std::abs(entropy_crossover(1e9 * ts, dk, cc).value - half_ln2) > 1e-6 ||
        std::abs(entropy_crossover(1e-6 * ts, dk, cc).value) > 1e-3)
        pass = false, why = "Sbar limits violated";

    // Digamma/trigamma identities at 1e-13.
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ux(0.5, 50.0);
    for (int i = 0; i < 200 && pass; ++i) {
        const double x = ux(rng);
        const double s1 = std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x);
        const double s2 = std::abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / (x * x));
        const double s3 = std::abs(0.5 * (digamma(x) + digamma(x + 0.5)) +
                                   std::log(2.0) - digamma(2.0 * x));
        if (s1 > 1e-13 * std::max(1.0, std::abs(digamma(x))) ||
            s2 > 1e-13 * std::max(1.0, trigamma(x)) ||
            s3 > 1e-13 * std::max(1.0, std::abs(digamma(2.0 * x))))
            pass = false, why = "digamma/trigamma identity miss";
    }
    if (pass && (std::abs(digamma(1.0) + 0.5772156649015329) > 1e-13 ||
                 std::abs(trigamma(1.0) - 1.6449340668482264) > 1e-13))
        pass = false, why = "digamma(1)/trigamma(1) miss";

    // Printed QSNR forms == pipeline; exact zero at dK = 0.
    std::uniform_real_distribution<double> ut(-5.0, -2.0), uk2(-4.0, -2.0);
    for (int i = 0; i < 50 && pass; ++i) {
        const double t = std::pow(10.0, ut(rng)) * cc.t_k;
        const double k = cc.k_c + std::pow(10.0, uk2(rng)) * cc.t_k;
        const auto [qt, qk] = qsnr_critical(t, k, cc);
        const double c = correlator(t, k, cc);
        const double den = (0.25 - c) * (0.75 + c);
        const double dt_ = dc_dt(t, k, cc), dk_ = dc_dk(t, k, cc);
        if (std::abs(qt / (t * t * dt_ * dt_ / den) - 1.0) > 1e-12 ||
            std::abs(qk / (k * k * dk_ * dk_ / den) - 1.0) > 1e-12)
            pass = false, why = "Eq.(30)/(31) vs pipeline miss";
    }
    if (pass && qsnr_critical(1e-4 * cc.t_k, cc.k_c, cc).first != 0.0)
        pass = false, why = "Q_SP(T) not exactly 0 at dK = 0";

    // Asymptotic fit: a_i = (1/Q - 1/dK^2) T^4 / dK^6 extrapolated to the
    // deep-regime intercept over points with x = c dK^2/(T T_K) >= 1.
    double a_fit = 0.0;
    if (pass) {
        std::vector<double> xs, as;
        for (int i = 0; i < 40; ++i) {
            const double t = std::pow(10.0, -6.0 + 2.0 * i / 39.0) * cc.t_k;
            for (int j = 0; j < 40; ++j) {
                const double d = std::pow(10.0, -4.0 + 2.0 * j / 39.0) * cc.t_k;
                const double x = cc.c * d * d / (t * cc.t_k);
                if (x < 1.0) continue;
                const double qt = qsnr_critical(t, cc.k_c + d, cc).first;
                if (!(qt > 0.0)) continue;
                xs.push_back(1.0 / x);
                as.push_back((1.0 / qt - 1.0 / (d * d)) * std::pow(t, 4) /
                             std::pow(d, 6));
            }
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            sx += xs[i], sy += as[i], sxx += xs[i] * xs[i], sxy += xs[i] * as[i];
        const double n = static_cast<double>(xs.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        a_fit = (sy - slope * sx) / n;
        if (!(a_fit >= 0.02 && a_fit <= 0.08))
            pass = false, why = fmt("asymptotic fit a = %.4f outside [0.02, 0.08]", a_fit);
    }
    const double dt = now_s() - t0;
    if (dt >= 5.0) pass = false, why = fmt("overran 5 s budget (%.2fs)", dt);
    report(7, pass,
           pass ? fmt("Sbar limits, psi identities, printed QSNR forms, "
                      "Q_SP(T)|_{dK=0} = 0, fit a = %.4f, %.2fs",
                      a_fit, dt)
                : why);
}

// --- criteria 8-10: NRG -------------------------------------------------------

// Plateau length: longest run of smoothed shells with |S - level| <= tol.
int plateau_shells(const std::vector<FlowRow>& flow, double level, double tol) {
    int best = 0, cur = 0;
    for (const FlowRow& r : flow) {
        cur = (std::abs(r.entropy_imp - level) <= tol) ? cur + 1 : 0;
        best = std::max(best, cur);
    }
    return best;
}

void criterion_8() {
    const double t0 = now_s();
    const double ln2 = std::log(2.0);
    bool pass = true;
    std::string why;

    NrgConfig cfg;  // Lambda = 3, N_s = 1500 desk scale

    // (i) Off-critical flows 2ln2 -> 0 on both sides of the transition.
    cfg.chain_length = 38;
    RunOptions stop;
    stop.early_stop = true;
    const NrgRun kondo = nrg_run(cfg, 0.0, 0.15, 0.0, stop);
    cfg.chain_length = 30;
    const NrgRun singlet = nrg_run(cfg, 1e-5, 0.15, 0.0, stop);
    for (const NrgRun* run : {&kondo, &singlet}) {
        const std::vector<FlowRow> s = smoothed_flow(*run);
        if (plateau_shells(s, 2.0 * ln2, 0.05) < 3 ||
            std::abs(s.back().entropy_imp) > 0.05)
            pass = false, why = "off-critical flow misses 2ln2 plateau or 0 end";
    }

    // (iii) T_K(J = 0.15) within a decade of 1e-7 D.
    const double tk015 = tk_from_flow(kondo);
    if (pass && !(tk015 >= 1e-8 && tk015 <= 1e-6))
        pass = false, why = fmt("T_K(0.15) = %.2e outside [1e-8, 1e-6]", tk015);

    // (ii) + (iv a): tune K_c at J = 0.15; the critical flow provides both the
    // 1/2 ln 2 plateau and the T_K entering K_c/T_K.
    double kc015 = 0.0, ratio = 0.0;
    int plateau = 0;
    if (pass) {
        cfg.chain_length = 40;
        kc015 = tune_kc(0.15, cfg, 1.1e-6, 2.1e-6, tk015, 0.5);
        cfg.chain_length = 42;
        const NrgRun crit = nrg_run(cfg, kc015, 0.15, 0.0);
        const std::vector<FlowRow> s = smoothed_flow(crit);
        plateau = plateau_shells(s, 0.5 * ln2, 0.02);
        if (plateau < 4) pass = false, why = fmt("critical plateau %d shells (< 4)", plateau);
        const double tk_crit = crossing_temperature(s, ln2);
        ratio = kc015 / tk_crit;
        if (pass && !(ratio >= 3.0 && ratio <= 12.0))
            pass = false, why = fmt("K_c/T_K = %.2f outside [3, 12]", ratio);
    }

    // (iv b) K_c(J = 1) within 30% of 0.618.
    double kc1 = 0.0;
    if (pass) {
        cfg.chain_length = 26;
        const double tk1 = estimate_tk(1.0, cfg);
        kc1 = tune_kc(1.0, cfg, 0.3, 0.9, tk1, 0.1);
        if (!(std::abs(kc1 / 0.618 - 1.0) <= 0.30))
            pass = false, why = fmt("K_c(J=1) = %.3f not within 30%% of 0.618", kc1);
    }

    // (v) ln T_K linear in 1/J across three J values.
    double r2 = 0.0;
    if (pass) {
        std::vector<double> inv_j, ln_tk;
        inv_j.push_back(1.0 / 0.15);
        ln_tk.push_back(std::log(tk015));
        for (auto [j, chain] : {std::pair{0.2, 30}, std::pair{0.3, 22}}) {
            cfg.chain_length = chain;
            inv_j.push_back(1.0 / j);
            ln_tk.push_back(std::log(estimate_tk(j, cfg)));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            sx += inv_j[i], sy += ln_tk[i];
            sxx += inv_j[i] * inv_j[i];
            sxy += inv_j[i] * ln_tk[i];
            syy += ln_tk[i] * ln_tk[i];
        }
        const double cov = 3 * sxy - sx * sy;
        r2 = cov * cov / ((3 * sxx - sx * sx) * (3 * syy - sy * sy));
        if (!(r2 > 0.99)) pass = false, why = fmt("ln T_K vs 1/J R^2 = %.4f", r2);
    }

    const double dt = now_s() - t0;
    if (pass && dt > 15.0 * 60.0) pass = false, why = fmt("overran 15 min (%.0fs)", dt);
    report(8, pass,
           pass ? fmt("NRG desk scale: T_K(0.15) = %.2e, K_c(0.15) = %.2e, "
                      "K_c/T_K = %.2f, 1/2 ln2 plateau %d shells, K_c(1) = %.3f, "
                      "R^2 = %.4f, %.0fs",
                      tk015, kc015, ratio, plateau, kc1, r2, dt)
                : why);
}

CriticalFit criterion_9() {
    NrgConfig cfg;
    cfg.chain_length = 26;
    const CriticalFit fit = extract_critical_constants(1.0, cfg, 0.45, 0.53, 1e-4);
    const CriticalConstants cc{fit.k_c, fit.t_k, fit.c, fit.c_star};
    const std::vector<WindowPoint> pts =
        nrg_window_scan(1.0, cfg, fit, {1e-3, 3e-3, 1e-2});

    int n = 0;
    double worst_t = 0.0, worst_k = 0.0;
    for (const WindowPoint& p : pts) {
        const double k = fit.k_c + p.delta_k;
        worst_t = std::max(worst_t,
                           std::abs(p.dc_dt_nrg / dc_dt(p.temperature, k, cc) - 1.0));
        worst_k = std::max(worst_k,
                           std::abs(p.dc_dk_nrg / dc_dk(p.temperature, k, cc) - 1.0));
        ++n;
    }
    const bool pass = n >= 12 && worst_t <= 0.10 && worst_k <= 0.10;
    report(9, pass,
           fmt("NRG vs exact on universal window (%d points): worst dC/dT dev "
               "%.1f%%, worst dC/dK dev %.1f%% (tol 10%%); K_c = %.5f, T_K = "
               "%.4f, c = %.4f, C* = %.4f",
               n, 100 * worst_t, 100 * worst_k, fit.k_c, fit.t_k, fit.c,
               fit.c_star));
    return fit;
}

void criterion_10(const CriticalFit& fit) {
    NrgConfig cfg;
    cfg.chain_length = 26;
    const std::vector<double> ks = {0.40, 0.43, 0.46, 0.49, 0.52, 0.55, 0.58};
    double nearest = ks[0];
    for (double k : ks)
        if (std::abs(k - fit.k_c) < std::abs(nearest - fit.k_c)) nearest = k;

    const std::vector<MetrologyRow> rows = nrg_metrology(1.0, cfg, ks);
    int max_shell = 0;
    for (const MetrologyRow& r : rows) max_shell = std::max(max_shell, r.shell);

    double best_k = 0.0, best_q = -1.0, qt_low = 0.0;
    for (const MetrologyRow& r : rows) {
        if (r.shell == max_shell && r.qsnr_k > best_q) best_q = r.qsnr_k, best_k = r.coupling;
        if (r.coupling == nearest && r.shell >= max_shell - 1)
            qt_low = std::max(qt_low, r.qsnr_t);
    }
    const bool pass = best_k == nearest && qt_low < 1e-3;
    report(10, pass,
           fmt("metrology grid: low-T Q_SP(K) max at K = %.2f (nearest to K_c "
               "= %.5f is %.2f), Q_SP(T) at K_c's grid point <= %.1e for the "
               "two lowest shells (tol 1e-3)",
               best_k, fit.k_c, nearest, qt_low));
}

}  // namespace

int main(int argc, char** argv) {
    // --fast skips the NRG criteria (8-10) for quick smoke runs.
    const bool fast = argc > 1 && std::string(argv[1]) == "--fast";
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    if (!fast) {
        criterion_8();
        const CriticalFit fit = criterion_9();
        criterion_10(fit);
    }
    return g_failures;
}
