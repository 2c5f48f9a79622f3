#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "blocktau/errors.hpp"
#include "blocktau/kendall.hpp"
#include "blocktau/partition.hpp"

namespace blocktau {

enum class SigmaMode { Full, Diagonal };

/// Shrinkage intensity in [0, 1].
struct ShrinkageWeight {
    double w;
    explicit ShrinkageWeight(double w) : w(w) {
        if (!(w >= 0.0 && w <= 1.0))
            throw std::invalid_argument("shrinkage weight must be in [0, 1]");
    }
};

/// Sampling covariance of the vectorized Kendall estimate: either the
/// full p x p matrix or its diagonal only.
struct SigmaEstimate {
    SigmaMode kind;
    Eigen::MatrixXd full;  // p x p when kind == Full
    Eigen::VectorXd diag;  // length p when kind == Diagonal
    int n = 0;

    int p() const {
        return kind == SigmaMode::Full ? static_cast<int>(full.rows())
                                       : static_cast<int>(diag.size());
    }
    double diagonal_entry(int r) const {
        return kind == SigmaMode::Full ? full(r, r) : diag[r];
    }
};

/// U-statistic building blocks of one covariance entry.
struct ThetaEstimates {
    double theta1, theta2, theta3, theta4;  // triple-sum terms
    double vartheta1, vartheta2;            // double-sum terms
};

/// Matrix-product evaluation of the six U-statistics for pair indices
/// (r, s). Requires n >= 3.
ThetaEstimates theta_hat_fast(const DataMatrix& data, int r, int s);

/// Definitional triple/double-sum evaluation, O(n^3); test oracle.
ThetaEstimates theta_hat_naive(const DataMatrix& data, int r, int s);

/// One plug-in covariance entry.
double sigma_hat_entry(const DataMatrix& data, const TauEstimate& tau, int r, int s);

/// Plug-in covariance of tau-hat. Full mode is guarded to p <= 10^4.
SigmaEstimate sigma_hat(const DataMatrix& data, const TauEstimate& tau, SigmaMode mode);

/// Structure-averaged estimate: reconstructs the Theta part, averages
/// it over the covariance cells of the partition, and subtracts the
/// rank-one term rebuilt from the block-projected tau. The result is
/// cell-constant by construction.
SigmaEstimate sigma_tilde(const SigmaEstimate& hat, const TauEstimate& tau_hat,
                          const Eigen::VectorXd& tau_tilde, const BlockStructure& bs);

/// Steinian shrinkage toward the diagonal; w = 1 yields a Diagonal
/// estimate, Diagonal input is returned unchanged.
SigmaEstimate shrink(const SigmaEstimate& sigma, ShrinkageWeight w);

/// Solve Sigma x = v. Throws SingularityError (with a hint to increase
/// the shrinkage weight) when the matrix is numerically singular.
Eigen::VectorXd solve_sigma(const SigmaEstimate& sigma, const Eigen::VectorXd& v);

}  // namespace blocktau
