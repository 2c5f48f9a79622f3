#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace blocktau {

/// Lexicographic bijection between the p = d(d-1)/2 upper-triangle
/// positions of a symmetric d x d matrix and flat indices 0..p-1.
///
/// Flat index 0 maps to (0,1), 1 to (0,2), ..., p-1 to (d-2,d-1).
/// All indices are 0-based internally; user-facing messages are 1-based.
class PairIndex {
public:
    explicit PairIndex(int d);

    int dim() const { return d_; }
    int pair_count() const { return p_; }

    /// Flat index -> (i, j) with i < j.
    std::pair<int, int> to_pair(int r) const;

    /// (i, j) with i < j -> flat index.
    int to_flat(int i, int j) const;

    /// Stack the strict upper triangle of a symmetric matrix into a
    /// length-p vector. The diagonal is ignored; asymmetry beyond
    /// 1e-12 absolute is an error.
    Eigen::VectorXd vectorize(const Eigen::MatrixXd& R) const;

    /// Inverse of vectorize: fill both triangles, set the diagonal.
    Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, double diag_value) const;

private:
    int d_;
    int p_;
    std::vector<int> row_of_;  // length p
    std::vector<int> col_of_;  // length p
};

}  // namespace blocktau
