#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "blocktau/pairs.hpp"

namespace blocktau {

/// Raised when a column contains tied values; the rank machinery
/// assumes continuous margins.
struct TieError : std::runtime_error {
    explicit TieError(int column)
        : std::runtime_error("ties detected in column " + std::to_string(column + 1)),
          column(column) {}
    int column;
};

/// n x d observation matrix.
struct DataMatrix {
    Eigen::MatrixXd values;

    int n() const { return static_cast<int>(values.rows()); }
    int d() const { return static_cast<int>(values.cols()); }

    /// Throws on non-finite entries or n < 2, d < 2.
    void validate() const;
    /// Throws TieError naming the first offending column.
    void require_no_ties() const;
};

/// Vectorized empirical Kendall matrix.
struct TauEstimate {
    Eigen::VectorXd tau;  // length p, lexicographic pair order
    int d = 0;
    int n = 0;

    Eigen::MatrixXd matrix() const { return PairIndex(d).unvectorize(tau, 1.0); }
};

enum class TiePolicy { Reject, BreakByInputOrder };

/// Empirical Kendall rank correlations for all column pairs.
/// Uses O(n log n) inversion counting per pair; exact equality with the
/// definitional double sum.
TauEstimate kendall_tau(const DataMatrix& data, TiePolicy ties = TiePolicy::Reject);

/// Definitional O(n^2) evaluation of a single pair, for cross-checks.
double kendall_tau_pair_naive(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// n x n concordance indicator for columns (i, j): entry (a,b) is 1 iff
/// row a is strictly below row b in both columns. Zero diagonal.
Eigen::MatrixXi concordance_indicator(const DataMatrix& data, int i, int j);

}  // namespace blocktau
