#include "tik/estimation.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace tik {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ParamVector::validate() const {
    if (names.size() != values.size())
        throw std::invalid_argument("ParamVector: names/values size mismatch");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!seen.insert(names[i]).second)
            throw std::invalid_argument("ParamVector: duplicate name " + names[i]);
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("ParamVector: non-finite value for " + names[i]);
        if (names[i] == "T" && values[i] <= 0.0)
            throw std::invalid_argument("ParamVector: temperature must be positive");
    }
}

int ParamVector::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

void PopulationJacobian::validate() const {
    const auto n = static_cast<Eigen::Index>(names.size());
    if (derivs.rows() != n || derivs.cols() != populations.size())
        throw std::invalid_argument("PopulationJacobian: shape mismatch");
    double sum = 0.0;
    for (Eigen::Index k = 0; k < populations.size(); ++k) {
        const double p = populations[k];
        if (!std::isfinite(p) || p < -1e-12)
            throw std::invalid_argument("PopulationJacobian: negative population");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("PopulationJacobian: populations not normalized");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(derivs.row(i).sum()) > 1e-10)
            throw std::invalid_argument(
                "PopulationJacobian: derivative row does not sum to zero");
    }
}

QfiMatrix::QfiMatrix(std::vector<std::string> names, Eigen::MatrixXd elements)
    : names_(std::move(names)), h_(std::move(elements)) {
    const auto n = h_.rows();
    if (h_.cols() != n || static_cast<Eigen::Index>(names_.size()) != n)
        throw std::invalid_argument("QfiMatrix: shape/label mismatch");
    if (!has_divergent_diagonal()) {
        const double scale = h_.cwiseAbs().maxCoeff();
        if ((h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1.0))
            throw std::invalid_argument("QfiMatrix: not symmetric");
        for (Eigen::Index i = 0; i < n; ++i)
            if (h_(i, i) < 0.0) throw std::invalid_argument("QfiMatrix: negative diagonal");
        det_ = n == 2 ? h_(0, 0) * h_(1, 1) - h_(0, 1) * h_(1, 0) : h_.determinant();
    } else {
        det_ = kInf;
    }
}

bool QfiMatrix::has_divergent_diagonal() const {
    for (Eigen::Index i = 0; i < h_.rows(); ++i)
        if (std::isinf(h_(i, i))) return true;
    return false;
}

double single_parameter_qfi(const PopulationJacobian& pj) {
    if (pj.names.size() != 1)
        throw std::invalid_argument("single_parameter_qfi: exactly one parameter expected");
    pj.validate();
    double qfi = 0.0;
    for (Eigen::Index k = 0; k < pj.populations.size(); ++k) {
        const double p = pj.populations[k];
        const double d = pj.derivs(0, k);
        if (p < kPopEps) {
            if (std::abs(d) < kPopEps) continue;  // 0*0/0 limit
            return kInf;                          // diverging sensitivity
        }
        qfi += d * d / p;
    }
    return qfi;
}

QfiMatrix build_qfim(const PopulationJacobian& pj) {
    pj.validate();
    const auto n = static_cast<Eigen::Index>(pj.names.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    std::vector<bool> divergent(n, false);
    for (Eigen::Index k = 0; k < pj.populations.size(); ++k) {
        const double p = pj.populations[k];
        if (p < kPopEps) {
            for (Eigen::Index i = 0; i < n; ++i)
                if (std::abs(pj.derivs(i, k)) >= kPopEps) divergent[i] = true;
            continue;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j)
                h(i, j) += pj.derivs(i, k) * pj.derivs(j, k) / p;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) h(i, j) = h(j, i);
    for (Eigen::Index i = 0; i < n; ++i)
        if (divergent[i]) h(i, i) = kInf;
    return QfiMatrix(pj.names, std::move(h));
}

std::optional<Eigen::MatrixXd> invert_qfim(const QfiMatrix& qfim) {
    const Eigen::MatrixXd& h = qfim.elements();
    const auto n = h.rows();
    double scale = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) scale *= std::max(h(i, i), kPopEps);
    const double det = qfim.determinant();
    if (!std::isinf(det) && std::abs(det) <= kSingEps * scale) return std::nullopt;
    if (n == 1) return Eigen::MatrixXd::Constant(1, 1, 1.0 / h(0, 0));
    if (n == 2) {
        Eigen::MatrixXd inv(2, 2);
        inv << h(1, 1), -h(0, 1), -h(0, 1), h(0, 0);
        return Eigen::MatrixXd(inv / det);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    return Eigen::MatrixXd(ldlt.solve(Eigen::MatrixXd::Identity(n, n)));
}

QsnrReport qsnr_report(const ParamVector& params, const QfiMatrix& qfim) {
    params.validate();
    if (params.names != qfim.names())
        throw std::invalid_argument("qsnr_report: parameter labels do not match QFIM");
    const Eigen::MatrixXd& h = qfim.elements();
    const auto n = h.rows();

    QsnrReport rep;
    rep.names = params.names;
    rep.sp.resize(n);
    rep.mp = Eigen::MatrixXd::Zero(n, n);
    rep.correlation = Eigen::MatrixXd::Identity(n, n);
    rep.determinant = qfim.determinant();

    for (Eigen::Index i = 0; i < n; ++i)
        rep.sp[i] = params.values[i] * params.values[i] * h(i, i);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double hii = h(i, i), hjj = h(j, j);
            if (std::isinf(hii) || std::isinf(hjj))
                rep.correlation(i, j) = 0.0;
            else if (hii <= 0.0 || hjj <= 0.0)
                rep.correlation(i, j) = 0.0;
            else
                rep.correlation(i, j) = h(i, j) / std::sqrt(hii * hjj);
        }

    // A divergent diagonal means that parameter is effectively known exactly:
    // drop it from the inversion (the Eq.-(8)-style correction term vanishes).
    std::vector<Eigen::Index> finite;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isinf(h(i, i))) finite.push_back(i);

    Eigen::MatrixXd hf(finite.size(), finite.size());
    for (std::size_t a = 0; a < finite.size(); ++a)
        for (std::size_t b = 0; b < finite.size(); ++b)
            hf(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                h(finite[a], finite[b]);
    std::vector<std::string> fnames;
    for (auto i : finite) fnames.push_back(params.names[static_cast<std::size_t>(i)]);

    if (finite.empty()) {
        rep.mp.setConstant(std::numeric_limits<double>::infinity());
        return rep;
    }

    auto inv = invert_qfim(QfiMatrix(fnames, hf));
    if (!inv) {
        rep.singular = true;  // all Q_MP are exactly zero
        return rep;
    }
    for (std::size_t a = 0; a < finite.size(); ++a)
        for (std::size_t b = 0; b < finite.size(); ++b) {
            const Eigen::Index i = finite[a], j = finite[b];
            const double lam = std::abs(params.values[i] * params.values[j]);
            const double invel = (*inv)(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            rep.mp(i, j) = lam / invel;  // signed via the sign of (H^-1)_ij
        }
    // Infinite-QFI parameters keep their single-parameter (infinite) value.
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::isinf(h(i, i))) rep.mp(i, i) = std::numeric_limits<double>::infinity();
    return rep;
}

double suboptimal_snr(double lambda, double mean_deriv, double variance) {
    if (variance <= 0.0)
        throw std::invalid_argument("suboptimal_snr: variance must be positive");
    return lambda * lambda * mean_deriv * mean_deriv / variance;
}

}  // namespace tik
