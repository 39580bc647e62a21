#pragma once

#include <utility>

#include "tik/estimation.hpp"
#include "tik/probe_rdm.hpp"

// Exact diagonalization of the narrow band limit: two spin-1/2 impurities,
// each exchange-coupled to a single bath orbital,
//   H = K S_L.S_R + J (S_L.s_L + S_R.s_R) + B Sz_tot,
// on the 64-dimensional space imp-L(2) x imp-R(2) x orb-L(4) x orb-R(4).
// Orbital site basis: {empty, up, down, up-down}; the field acts globally on
// impurity and orbital spins. With fields along z only the Hamiltonian is
// real symmetric. Basis index = ((iL*2 + iR)*4 + oL)*4 + oR with spin
// convention 0 = up, 1 = down for impurities.

namespace tik {

struct NblParams {
    double temperature;  // T > 0
    double coupling;     // K
    double exchange;     // J
    double field = 0.0;  // B

    void validate() const;
};

struct DenseHermitian {
    int dim = 0;
    Eigen::MatrixXd mat;

    void validate() const;  // symmetric within 1e-13
};

struct ThermalSolution {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    double z = 0.0;            // shifted partition function (weights sum)
    double free_energy = 0.0;  // F = -T ln Z (unshifted)
    double entropy = 0.0;      // S = (<H> - F)/T
    Eigen::Matrix4d probe_rdm; // in the (S, T+1, T0, T-1) basis
    ProbeState probe{};        // its diagonal
};

// 64x64 real symmetric NBL Hamiltonian.
DenseHermitian build_hamiltonian(double coupling, double exchange, double field);

// Full eigendecomposition + Gibbs state at temperature T; probe RDM by partial
// trace over both orbitals, rotated to the singlet/triplet basis. Throws if a
// probe RDM off-diagonal exceeds 1e-10 (symmetry violation = construction bug).
ThermalSolution thermal_solution(const DenseHermitian& h, double temperature);

// Probe observables of the thermal state.
ProbeObservables nbl_observables(const NblParams& p);

// Free energy F = -T ln Z.
double nbl_free_energy(const NblParams& p);

// Impurity entropy of the thermal state.
double nbl_entropy(const NblParams& p);

// QFIM + QSNR report for the given unknowns (subset of {"T","K"}), populations
// differentiated by central finite differences with step max(1e-5|l|, 1e-7).
std::pair<QfiMatrix, QsnrReport> nbl_metrology(const NblParams& p,
                                               const std::vector<std::string>& unknowns);

}  // namespace tik
