#include "blocktau/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <vector>

namespace blocktau {

void DataMatrix::validate() const {
    if (n() < 2) throw std::invalid_argument("DataMatrix: need at least 2 rows");
    if (d() < 2) throw std::invalid_argument("DataMatrix: need at least 2 columns");
    if (!values.allFinite())
        throw std::invalid_argument("DataMatrix: non-finite entry");
}

void DataMatrix::require_no_ties() const {
    for (int j = 0; j < d(); ++j) {
        std::vector<double> col(values.col(j).begin(), values.col(j).end());
        std::sort(col.begin(), col.end());
        if (std::adjacent_find(col.begin(), col.end()) != col.end()) throw TieError(j);
    }
}

namespace {

// Ranks 0..n-1; ties broken by input order (stable). Returns whether the
// column had ties.
bool column_ranks(const Eigen::VectorXd& col, std::vector<double>& ranks) {
    const int n = static_cast<int>(col.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return col[a] < col[b]; });
    bool ties = false;
    ranks.resize(n);
    for (int r = 0; r < n; ++r) {
        ranks[order[r]] = r;
        if (r > 0 && col[order[r]] == col[order[r - 1]]) ties = true;
    }
    return ties;
}

// Number of inversions in v, by merge sort. v is clobbered.
long long count_inversions(std::vector<double>& v, std::vector<double>& buf) {
    const int n = static_cast<int>(v.size());
    long long inv = 0;
    for (int width = 1; width < n; width *= 2) {
        for (int lo = 0; lo < n; lo += 2 * width) {
            const int mid = std::min(lo + width, n);
            const int hi = std::min(lo + 2 * width, n);
            int a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (v[b] < v[a]) {
                    inv += mid - a;
                    buf[k++] = v[b++];
                } else {
                    buf[k++] = v[a++];
                }
            }
            while (a < mid) buf[k++] = v[a++];
            while (b < hi) buf[k++] = v[b++];
            std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
        }
    }
    return inv;
}

}  // namespace

TauEstimate kendall_tau(const DataMatrix& data, TiePolicy ties) {
    data.validate();
    const int n = data.n(), d = data.d();

    std::vector<std::vector<double>> ranks(d);
    for (int j = 0; j < d; ++j) {
        if (column_ranks(data.values.col(j), ranks[j])) {
            if (ties == TiePolicy::Reject) throw TieError(j);
            std::cerr << "warning: ties in column " << j + 1
                      << " broken by input order\n";
        }
    }

    PairIndex idx(d);
    TauEstimate est;
    est.d = d;
    est.n = n;
    est.tau.resize(idx.pair_count());

    std::vector<int> order(n);
    std::vector<double> y(n), buf(n);
    for (int r = 0; r < idx.pair_count(); ++r) {
        auto [i, j] = idx.to_pair(r);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return ranks[i][a] < ranks[i][b]; });
        for (int k = 0; k < n; ++k) y[k] = ranks[j][order[k]];
        const long long disc = count_inversions(y, buf);
        const long long conc = static_cast<long long>(n) * (n - 1) / 2 - disc;
        // same expression as the definitional double sum, for bitwise equality
        est.tau[r] = -1.0 + 4.0 * static_cast<double>(conc) /
                                (static_cast<double>(n) * (n - 1));
    }
    return est;
}

double kendall_tau_pair_naive(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(x.size());
    long long s = 0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && x[a] <= x[b] && y[a] <= y[b]) ++s;
    return -1.0 + 4.0 * static_cast<double>(s) / (static_cast<double>(n) * (n - 1));
}

Eigen::MatrixXi concordance_indicator(const DataMatrix& data, int i, int j) {
    if (i == j) throw std::invalid_argument("concordance_indicator: columns must differ");
    const int n = data.n();
    Eigen::MatrixXi ind = Eigen::MatrixXi::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (data.values(a, i) < data.values(b, i) &&
                data.values(a, j) < data.values(b, j))
                ind(a, b) = 1;
    return ind;
}

}  // namespace blocktau
