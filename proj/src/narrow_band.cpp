#include "tik/narrow_band.hpp"

#include <cmath>
#include <stdexcept>

namespace tik {

namespace {

using Eigen::MatrixXd;

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Impurity spin-1/2 operators in the basis (up, down).
MatrixXd imp_sz() { return (MatrixXd(2, 2) << 0.5, 0.0, 0.0, -0.5).finished(); }
MatrixXd imp_sp() { return (MatrixXd(2, 2) << 0.0, 1.0, 0.0, 0.0).finished(); }

// Orbital spin operators in the site basis (empty, up, down, up-down);
// s = (1/2) c^dag sigma c vanishes on the empty and doubly occupied states.
MatrixXd orb_sz() {
    MatrixXd m = MatrixXd::Zero(4, 4);
    m(1, 1) = 0.5;
    m(2, 2) = -0.5;
    return m;
}
MatrixXd orb_sp() {
    MatrixXd m = MatrixXd::Zero(4, 4);
    m(1, 2) = 1.0;  // s+ |down> = |up>
    return m;
}

// S_a . S_b = Sz Sz + (S+ S- + S- S+)/2 from factor operators embedded at the
// given slots of the 4-factor product (dims 2,2,4,4).
MatrixXd embed(const MatrixXd& op, int slot) {
    const int dims[4] = {2, 2, 4, 4};
    MatrixXd out = MatrixXd::Identity(1, 1);
    for (int s = 0; s < 4; ++s)
        out = kron(out, s == slot ? op : MatrixXd::Identity(dims[s], dims[s]));
    return out;
}

MatrixXd spin_dot(const MatrixXd& za, const MatrixXd& pa, const MatrixXd& zb,
                  const MatrixXd& pb) {
    return za * zb + 0.5 * (pa * pb.transpose() + pa.transpose() * pb);
}

// Rotation from the impurity product basis (uu, ud, du, dd) to the
// singlet/triplet basis (S, T+1, T0, T-1).
Eigen::Matrix4d st_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4d u = Eigen::Matrix4d::Zero();
    u(1, 0) = r;   // |S>  = (|ud> - |du>)/sqrt2
    u(2, 0) = -r;
    u(0, 1) = 1.0; // |T+> = |uu>
    u(1, 2) = r;   // |T0> = (|ud> + |du>)/sqrt2
    u(2, 2) = r;
    u(3, 3) = 1.0; // |T-> = |dd>
    return u;
}

ProbeState probe_populations(const NblParams& p) {
    return thermal_solution(build_hamiltonian(p.coupling, p.exchange, p.field),
                            p.temperature)
        .probe;
}

}  // namespace

void NblParams::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("NblParams: temperature must be positive");
    if (!std::isfinite(coupling) || !std::isfinite(exchange) || !std::isfinite(field))
        throw std::invalid_argument("NblParams: non-finite parameter");
}

void DenseHermitian::validate() const {
    if (mat.rows() != dim || mat.cols() != dim)
        throw std::invalid_argument("DenseHermitian: dimension mismatch");
    if ((mat - mat.transpose()).cwiseAbs().maxCoeff() > 1e-13)
        throw std::invalid_argument("DenseHermitian: not symmetric");
}

DenseHermitian build_hamiltonian(double coupling, double exchange, double field) {
    if (!std::isfinite(coupling) || !std::isfinite(exchange) || !std::isfinite(field))
        throw std::invalid_argument("build_hamiltonian: non-finite parameter");

    const MatrixXd szL = embed(imp_sz(), 0), spL = embed(imp_sp(), 0);
    const MatrixXd szR = embed(imp_sz(), 1), spR = embed(imp_sp(), 1);
    const MatrixXd ozL = embed(orb_sz(), 2), opL = embed(orb_sp(), 2);
    const MatrixXd ozR = embed(orb_sz(), 3), opR = embed(orb_sp(), 3);

    MatrixXd h = coupling * spin_dot(szL, spL, szR, spR) +
                 exchange * (spin_dot(szL, spL, ozL, opL) +
                             spin_dot(szR, spR, ozR, opR)) +
                 field * (szL + szR + ozL + ozR);
    DenseHermitian out{64, std::move(h)};
    out.validate();
    return out;
}

ThermalSolution thermal_solution(const DenseHermitian& h, double temperature) {
    h.validate();
    if (!(temperature > 0.0))
        throw std::invalid_argument("thermal_solution: temperature must be positive");

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.mat);
    ThermalSolution sol;
    sol.eigenvalues = es.eigenvalues();
    sol.eigenvectors = es.eigenvectors();

    const double e0 = sol.eigenvalues.minCoeff();
    const Eigen::VectorXd w =
        ((-(sol.eigenvalues.array() - e0)) / temperature).exp();
    sol.z = w.sum();
    const Eigen::VectorXd rho = w / sol.z;
    sol.free_energy = e0 - temperature * std::log(sol.z);
    const double e_mean = rho.dot(sol.eigenvalues);
    sol.entropy = (e_mean - sol.free_energy) / temperature;

    // Partial trace over the 16 bath configurations: index = (a*16 + bath).
    Eigen::Matrix4d rdm = Eigen::Matrix4d::Zero();
    for (int n = 0; n < 64; ++n) {
        if (rho[n] < 1e-300) continue;
        const auto v = sol.eigenvectors.col(n);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double acc = 0.0;
                for (int bath = 0; bath < 16; ++bath)
                    acc += v[a * 16 + bath] * v[b * 16 + bath];
                rdm(a, b) += rho[n] * acc;
            }
    }
    const Eigen::Matrix4d u = st_basis();
    sol.probe_rdm = u.transpose() * rdm * u;

    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b && std::abs(sol.probe_rdm(a, b)) >= 1e-10)
                throw std::runtime_error(
                    "thermal_solution: probe RDM off-diagonal >= 1e-10 "
                    "(symmetry violation)");

    auto clamp = [](double x) { return (x < 0.0 && x >= -1e-12) ? 0.0 : x; };
    sol.probe = {clamp(sol.probe_rdm(0, 0)), clamp(sol.probe_rdm(1, 1)),
                 clamp(sol.probe_rdm(2, 2)), clamp(sol.probe_rdm(3, 3))};
    sol.probe.validate();
    return sol;
}

ProbeObservables nbl_observables(const NblParams& p) {
    p.validate();
    return observables_of(probe_populations(p));
}

double nbl_free_energy(const NblParams& p) {
    p.validate();
    return thermal_solution(build_hamiltonian(p.coupling, p.exchange, p.field),
                            p.temperature)
        .free_energy;
}

double nbl_entropy(const NblParams& p) {
    p.validate();
    return thermal_solution(build_hamiltonian(p.coupling, p.exchange, p.field),
                            p.temperature)
        .entropy;
}

std::pair<QfiMatrix, QsnrReport> nbl_metrology(const NblParams& p,
                                               const std::vector<std::string>& unknowns) {
    p.validate();
    if (unknowns.empty())
        throw std::invalid_argument("nbl_metrology: no unknowns given");

    PopulationJacobian pj;
    pj.names = unknowns;
    pj.populations = probe_populations(p).as_vector();
    pj.derivs.resize(static_cast<Eigen::Index>(unknowns.size()), 4);

    std::vector<double> values;
    for (std::size_t i = 0; i < unknowns.size(); ++i) {
        const std::string& name = unknowns[i];
        double lambda;
        if (name == "T")
            lambda = p.temperature;
        else if (name == "K")
            lambda = p.coupling;
        else
            throw std::invalid_argument("nbl_metrology: unknown parameter " + name);
        values.push_back(lambda);

        const double h = std::max(1e-5 * std::abs(lambda), 1e-7);
        if (!(h > 0.0))
            throw std::invalid_argument("nbl_metrology: derivative step underflow");
        NblParams plus = p, minus = p;
        if (name == "T") {
            plus.temperature += h;
            minus.temperature -= h;
        } else {
            plus.coupling += h;
            minus.coupling -= h;
        }
        Eigen::Vector4d d = (probe_populations(plus).as_vector() -
                             probe_populations(minus).as_vector()) /
                            (2.0 * h);
        // Normalization is parameter-independent; project out the O(eps/h)
        // finite-difference residue so the row sums to zero exactly.
        d.array() -= d.mean();
        pj.derivs.row(static_cast<Eigen::Index>(i)) = d;
    }

    QfiMatrix qfim = build_qfim(pj);
    QsnrReport rep = qsnr_report(ParamVector{unknowns, values}, qfim);
    return {std::move(qfim), std::move(rep)};
}

}  // namespace tik
