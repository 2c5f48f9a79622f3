#pragma once

#include <Eigen/Dense>

#include "blocktau/covariance.hpp"
#include "blocktau/kendall.hpp"
#include "blocktau/partition.hpp"

namespace blocktau {

/// Block-constant rank-correlation estimate for a given partition.
struct BlockTauEstimate {
    Eigen::VectorXd tau_tilde;        // length p, block-constant
    Partition partition;
    Eigen::VectorXd per_block_values; // length L, one value per pair block
};

/// d x d symmetric matrix with unit diagonal and entries in [-1, 1].
struct CorrelationMatrix {
    Eigen::MatrixXd values;

    int d() const { return static_cast<int>(values.rows()); }
    /// Throws on asymmetry (1e-12), non-unit diagonal, or |entry| > 1.
    void validate() const;
};

/// Block estimate: the mean of tau-hat over each pair block. Does not
/// depend on the covariance.
BlockTauEstimate project_tau(const TauEstimate& tau_hat, const Partition& g);

/// Mahalanobis distance (tau-hat - t)' Sigma^{-1} (tau-hat - t).
double loss(const Eigen::VectorXd& t, const TauEstimate& tau_hat,
            const SigmaEstimate& sigma);

/// Generalized-least-squares projection (B' S^-1 B)^-1 B' S^-1 tau-hat.
/// Test-support: coincides with project_tau exactly when sigma is
/// cell-constant for the partition.
Eigen::VectorXd weighted_projection_check(const TauEstimate& tau_hat, const Partition& g,
                                          const SigmaEstimate& sigma);

/// Elementwise rho = sin(pi tau / 2); unit diagonal preserved.
CorrelationMatrix sine_transform(const CorrelationMatrix& tau_matrix);

/// Elementwise tau = (2/pi) asin(rho).
CorrelationMatrix inverse_sine_transform(const CorrelationMatrix& p);

/// Inverse of a block-structured correlation matrix, re-averaged
/// block-wise (off-diagonal over the pair blocks, diagonal within
/// clusters) so the structure holds exactly. identity_shrink mixes
/// epsilon of the identity into P before inverting (opt-in fix for
/// near-singular inputs).
Eigen::MatrixXd precision_matrix(const CorrelationMatrix& p_tilde, const Partition& g,
                                 bool identity_shrink = false, double epsilon = 1e-3);

}  // namespace blocktau
