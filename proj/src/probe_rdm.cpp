#include "tik/probe_rdm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tik {

namespace {
// Tiny negative rounding residue from partial traces is clamped to 0.
double clamp_pop(double p) {
    if (p < 0.0 && p >= -1e-12) return 0.0;
    return p;
}
}  // namespace

void ProbeState::validate() const {
    const Eigen::Vector4d v = as_vector();
    for (int k = 0; k < 4; ++k)
        if (!(v[k] >= -1e-12 && v[k] <= 1.0 + 1e-12))
            throw std::invalid_argument("ProbeState: population out of [0,1]");
    if (std::abs(v.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("ProbeState: populations not normalized");
}

void ProbeObservables::validate() const {
    if (c < -0.75 - 1e-12 || c > 0.25 + 1e-12)
        throw std::invalid_argument("ProbeObservables: correlator out of [-3/4, 1/4]");
    if (std::abs(m) > 1.0 + 1e-12)
        throw std::invalid_argument("ProbeObservables: |magnetization| > 1");
    if (chi < -1e-12 || chi > 1.0 + 1e-12)
        throw std::invalid_argument("ProbeObservables: chi out of [0,1]");
    if (chi < std::abs(m) - 1e-12)
        throw std::invalid_argument("ProbeObservables: chi < |m|");
    if (0.75 + c - chi < -1e-12)
        throw std::invalid_argument("ProbeObservables: 3/4 + c - chi < 0");
}

ProbeState rdm_zero_field(double c) {
    if (c < -0.75 - 1e-12 || c > 0.25 + 1e-12)
        throw std::invalid_argument("rdm_zero_field: correlator out of [-3/4, 1/4]");
    const double t = clamp_pop(0.25 + c / 3.0);
    return {clamp_pop(0.25 - c), t, t, t};
}

ProbeState rdm_with_field(const ProbeObservables& obs) {
    obs.validate();
    ProbeState s{0.25 - obs.c, 0.5 * (obs.chi + obs.m), 0.75 + obs.c - obs.chi,
                 0.5 * (obs.chi - obs.m)};
    const Eigen::Vector4d v = s.as_vector();
    for (int k = 0; k < 4; ++k)
        if (v[k] < -1e-12)
            throw std::invalid_argument("rdm_with_field: inconsistent observables");
    return {clamp_pop(s.singlet), clamp_pop(s.triplet_plus), clamp_pop(s.triplet_zero),
            clamp_pop(s.triplet_minus)};
}

ProbeObservables observables_of(const ProbeState& state) {
    state.validate();
    return {-0.75 * state.singlet +
                0.25 * (state.triplet_plus + state.triplet_zero + state.triplet_minus),
            state.triplet_plus - state.triplet_minus,
            state.triplet_plus + state.triplet_minus};
}

double chi_ansatz(double c, double m) {
    const double half = 0.5 + 2.0 * c / 3.0;
    const double radicand = half * half - m * m / 3.0;
    if (radicand < 0.0)
        throw std::invalid_argument("chi_ansatz: radicand negative (outside ansatz domain)");
    return 1.0 + 4.0 * c / 3.0 - std::sqrt(radicand);
}

PopulationJacobian population_jacobian(const ProbeObservables& obs,
                                       const std::vector<std::string>& names,
                                       const Eigen::MatrixXd& jac) {
    obs.validate();
    const auto n = static_cast<Eigen::Index>(names.size());
    if (jac.rows() != n || jac.cols() != 3)
        throw std::invalid_argument("population_jacobian: jacobian must be n x 3");
    const ProbeState st = rdm_with_field(obs);
    PopulationJacobian pj;
    pj.names = names;
    pj.populations = st.as_vector();
    pj.derivs.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dc = jac(i, 0), dm = jac(i, 1), dchi = jac(i, 2);
        pj.derivs(i, 0) = -dc;                  // rho_S = 1/4 - C
        pj.derivs(i, 1) = 0.5 * (dchi + dm);    // rho_{T;+1}
        pj.derivs(i, 2) = dc - dchi;            // rho_{T;0}
        pj.derivs(i, 3) = 0.5 * (dchi - dm);    // rho_{T;-1}
    }
    return pj;
}

QfiMatrix qfim_from_observables(const ProbeObservables& obs,
                                const std::vector<std::string>& names,
                                const Eigen::MatrixXd& jac) {
    obs.validate();
    const auto n = static_cast<Eigen::Index>(names.size());
    if (jac.rows() != n || jac.cols() != 3)
        throw std::invalid_argument("qfim_from_observables: jacobian must be n x 3");

    // Population denominators and the corresponding derivative combinations.
    const double denom[4] = {obs.chi + obs.m,          // 2 rho_{T;+1}
                             obs.chi - obs.m,          // 2 rho_{T;-1}
                             0.75 + obs.c - obs.chi,   // rho_{T;0}
                             0.25 - obs.c};            // rho_S
    Eigen::MatrixXd num(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        num(i, 0) = jac(i, 2) + jac(i, 1);  // d(chi + M)
        num(i, 1) = jac(i, 2) - jac(i, 1);  // d(chi - M)
        num(i, 2) = jac(i, 0) - jac(i, 2);  // d(C - chi)
        num(i, 3) = jac(i, 0);              // dC
    }
    const double weight[4] = {0.5, 0.5, 1.0, 1.0};

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> divergent(n, false);
    for (int term = 0; term < 4; ++term) {
        double d = denom[term];
        if (d < 0.0 && d >= -1e-12) d = 0.0;
        if (d < kPopEps) {
            for (Eigen::Index i = 0; i < n; ++i)
                if (std::abs(num(i, term)) >= kPopEps) divergent[i] = true;
            continue;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j)
                h(i, j) += weight[term] * num(i, term) * num(j, term) / d;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) h(i, j) = h(j, i);
    for (Eigen::Index i = 0; i < n; ++i)
        if (divergent[i]) h(i, i) = std::numeric_limits<double>::infinity();
    return QfiMatrix(names, std::move(h));
}

}  // namespace tik
