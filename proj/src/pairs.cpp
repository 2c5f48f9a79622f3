#include "blocktau/pairs.hpp"

#include <cmath>
#include <string>

namespace blocktau {

PairIndex::PairIndex(int d) : d_(d), p_(d * (d - 1) / 2) {
    if (d < 2) throw std::invalid_argument("PairIndex: dimension must be >= 2");
    row_of_.reserve(p_);
    col_of_.reserve(p_);
    for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j) {
            row_of_.push_back(i);
            col_of_.push_back(j);
        }
}

std::pair<int, int> PairIndex::to_pair(int r) const {
    if (r < 0 || r >= p_)
        throw std::out_of_range("PairIndex::to_pair: index " + std::to_string(r + 1) +
                                " outside 1.." + std::to_string(p_));
    return {row_of_[r], col_of_[r]};
}

int PairIndex::to_flat(int i, int j) const {
    if (i < 0 || j >= d_ || i >= j)
        throw std::invalid_argument("PairIndex::to_flat: need 1 <= i < j <= " +
                                    std::to_string(d_));
    // pairs preceding row i: sum_{k<i} (d-1-k)
    return i * d_ - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::VectorXd PairIndex::vectorize(const Eigen::MatrixXd& R) const {
    if (R.rows() != d_ || R.cols() != d_)
        throw std::invalid_argument("vectorize: matrix must be " + std::to_string(d_) +
                                    "x" + std::to_string(d_));
    for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j)
            if (std::abs(R(i, j) - R(j, i)) > 1e-12)
                throw std::invalid_argument("vectorize: matrix not symmetric at (" +
                                            std::to_string(i + 1) + "," +
                                            std::to_string(j + 1) + ")");
    Eigen::VectorXd v(p_);
    for (int r = 0; r < p_; ++r) v[r] = R(row_of_[r], col_of_[r]);
    return v;
}

Eigen::MatrixXd PairIndex::unvectorize(const Eigen::VectorXd& v, double diag_value) const {
    if (v.size() != p_)
        throw std::invalid_argument("unvectorize: vector length must be " +
                                    std::to_string(p_));
    Eigen::MatrixXd R = Eigen::MatrixXd::Constant(d_, d_, diag_value);
    for (int r = 0; r < p_; ++r) {
        R(row_of_[r], col_of_[r]) = v[r];
        R(col_of_[r], row_of_[r]) = v[r];
    }
    return R;
}

}  // namespace blocktau
