#pragma once

#include "tik/estimation.hpp"

// Two-impurity probe reduced density matrix: conversions between the four
// diagonal populations and the physical observables (C, M, chi), the chi
// ansatz, and QFIM assembly from observable jacobians.
//
// Basis ordering convention (fixed throughout): (S, T+1, T0, T-1).

namespace tik {

struct ProbeState {
    double singlet;        // rho_S
    double triplet_plus;   // rho_{T;+1}
    double triplet_zero;   // rho_{T;0}
    double triplet_minus;  // rho_{T;-1}

    void validate() const;
    Eigen::Vector4d as_vector() const {
        return {singlet, triplet_plus, triplet_zero, triplet_minus};
    }
};

struct ProbeObservables {
    double c;    // spin-spin correlator <S_IL . S_IR>, in [-3/4, 1/4]
    double m;    // magnetization <S^z_IL + S^z_IR>
    double chi;  // <(S^z_IL + S^z_IR)^2>

    void validate() const;
};

// rho_S = 1/4 - c, rho_{T;m} = 1/4 + c/3 each (zero-field SU(2) degeneracy).
ProbeState rdm_zero_field(double c);

// rho_S = 1/4 - C, rho_{T;0} = 3/4 + C - chi, rho_{T;+-1} = (chi +- M)/2.
ProbeState rdm_with_field(const ProbeObservables& obs);

ProbeObservables observables_of(const ProbeState& state);

// chi ~ 1 + 4C/3 - sqrt((1/2 + 2C/3)^2 - M^2/3); exact in the large-K and
// small-B limits (geometric-ratio triplet weights). Never substituted
// silently for a computed chi; callers opt in.
double chi_ansatz(double c, double m);

// QFIM from the observable jacobian (rows = parameters, cols = dC, dM, dchi),
// via the four-term population sum. Equals build_qfim through the chain rule.
QfiMatrix qfim_from_observables(const ProbeObservables& obs,
                                const std::vector<std::string>& names,
                                const Eigen::MatrixXd& jac);

// Chain-rule population jacobian implied by an observable jacobian.
PopulationJacobian population_jacobian(const ProbeObservables& obs,
                                       const std::vector<std::string>& names,
                                       const Eigen::MatrixXd& jac);

}  // namespace tik
