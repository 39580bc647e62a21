#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

// Parameter-agnostic estimation algebra: QFI matrices built from
// parameterized populations, their inverses, and signal-to-noise reports.
// All functions are pure; values are freely shareable across threads.

namespace tik {

// Population below this is treated as exactly zero (double-precision noise
// floor of thermal weights).
inline constexpr double kPopEps = 1e-14;

// Relative determinant threshold declaring a QFI matrix singular.
inline constexpr double kSingEps = 1e-12;

struct ParamVector {
    std::vector<std::string> names;
    std::vector<double> values;

    // names unique, values finite, temperature entries ("T") strictly positive
    void validate() const;
    int index_of(const std::string& name) const;  // -1 if absent
};

// Populations rho_k of a parameterized diagonal state together with the
// derivative matrix d rho_k / d lambda_i (one row per parameter).
struct PopulationJacobian {
    std::vector<std::string> names;  // n parameter labels
    Eigen::VectorXd populations;     // m probabilities
    Eigen::MatrixXd derivs;          // n x m

    void validate() const;
};

// Symmetric PSD matrix of QFI elements labeled by parameter names.
class QfiMatrix {
  public:
    QfiMatrix(std::vector<std::string> names, Eigen::MatrixXd elements);

    const std::vector<std::string>& names() const { return names_; }
    const Eigen::MatrixXd& elements() const { return h_; }
    double determinant() const { return det_; }
    int size() const { return static_cast<int>(h_.rows()); }
    bool has_divergent_diagonal() const;

  private:
    std::vector<std::string> names_;
    Eigen::MatrixXd h_;
    double det_;
};

struct QsnrReport {
    std::vector<std::string> names;
    Eigen::VectorXd sp;           // per-parameter single-parameter QSNR
    Eigen::MatrixXd mp;           // multiparameter QSNR matrix (signed off-diagonals)
    Eigen::MatrixXd correlation;  // pairwise Cor(lambda_i, lambda_j), 1 on diagonal
    double determinant = 0.0;
    bool singular = false;
};

// Scalar QFI sum_k (d rho_k)^2 / rho_k for a single-parameter jacobian.
// Returns +inf when a population vanishes under a nonvanishing derivative
// (diverging sensitivity is a value, not an error).
double single_parameter_qfi(const PopulationJacobian& pj);

// H_ij = sum_k (d_i rho_k)(d_j rho_k) / rho_k.
QfiMatrix build_qfim(const PopulationJacobian& pj);

// Inverse of the QFIM, or nullopt when singular
// (|det| <= kSingEps * prod_i max(H_ii, kPopEps)).
std::optional<Eigen::MatrixXd> invert_qfim(const QfiMatrix& h);

// Single- and multiparameter QSNRs, correlations, and the singularity flag.
// A divergent (+inf) diagonal element treats that parameter as known: its own
// entries are +inf and the remaining block is inverted on its own.
QsnrReport qsnr_report(const ParamVector& params, const QfiMatrix& h);

// Error-propagation SNR lambda^2 |d<Omega>/d lambda|^2 / Var[Omega] for a
// suboptimal observable measurement.
double suboptimal_snr(double lambda, double mean_deriv, double variance);

}  // namespace tik
