#include "blocktau/covariance.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace blocktau {

namespace {

double rank_one_factor(int n) {
    return 2.0 * (2.0 * n - 3.0) / (static_cast<double>(n) * (n - 1));
}

double entry_scale(int n) {
    const double m = static_cast<double>(n) * (n - 1);
    return 16.0 / (m * m);
}

// Symmetric concordance matrix M = I + I^T for one pair of columns:
// M(a,b) = 1 iff rows a and b agree in sign across both columns.
Eigen::MatrixXd concordance_m(const DataMatrix& data, int i, int j) {
    const int n = data.n();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const bool ci = data.values(a, i) < data.values(b, i);
            const bool cj = data.values(a, j) < data.values(b, j);
            if (ci == cj) m(a, b) = m(b, a) = 1.0;
        }
    return m;
}

}  // namespace

ThetaEstimates theta_hat_fast(const DataMatrix& data, int r, int s) {
    data.validate();
    const int n = data.n();
    if (n < 3) throw std::invalid_argument("theta_hat_fast: need n >= 3");
    PairIndex idx(data.d());
    auto [i1, j1] = idx.to_pair(r);
    auto [i2, j2] = idx.to_pair(s);
    const Eigen::MatrixXd ind1 = concordance_indicator(data, i1, j1).cast<double>();
    const Eigen::MatrixXd ind2 = concordance_indicator(data, i2, j2).cast<double>();

    const Eigen::VectorXd row1 = ind1.rowwise().sum(), col1 = ind1.colwise().sum();
    const Eigen::VectorXd row2 = ind2.rowwise().sum(), col2 = ind2.colwise().sum();
    const double same = ind1.cwiseProduct(ind2).sum();            // I1 o I2
    const double flip = ind1.cwiseProduct(ind2.transpose()).sum();  // I1 o I2^T

    const double triple = static_cast<double>(n) * (n - 1) * (n - 2);
    const double dbl = static_cast<double>(n) * (n - 1);
    ThetaEstimates t;
    t.theta1 = (col1.dot(col2) - same) / triple;
    t.theta2 = (row1.dot(col2) - flip) / triple;
    t.theta3 = (col1.dot(row2) - flip) / triple;
    t.theta4 = (row1.dot(row2) - same) / triple;
    t.vartheta1 = same / dbl;
    t.vartheta2 = flip / dbl;
    return t;
}

ThetaEstimates theta_hat_naive(const DataMatrix& data, int r, int s) {
    data.validate();
    const int n = data.n();
    if (n < 3) throw std::invalid_argument("theta_hat_naive: need n >= 3");
    PairIndex idx(data.d());
    auto [i1, j1] = idx.to_pair(r);
    auto [i2, j2] = idx.to_pair(s);
    const auto below1 = [&](int a, int b) {
        return data.values(a, i1) <= data.values(b, i1) &&
               data.values(a, j1) <= data.values(b, j1);
    };
    const auto below2 = [&](int a, int b) {
        return data.values(a, i2) <= data.values(b, i2) &&
               data.values(a, j2) <= data.values(b, j2);
    };
    long long t1 = 0, t2 = 0, t3 = 0, t4 = 0, v1 = 0, v2 = 0;
    for (int t = 0; t < n; ++t)
        for (int u = 0; u < n; ++u) {
            if (u == t) continue;
            v1 += below1(u, t) && below2(u, t);
            v2 += below1(u, t) && below2(t, u);
            for (int v = 0; v < n; ++v) {
                if (v == t || v == u) continue;
                t1 += below1(u, t) && below2(v, t);
                t2 += below1(t, u) && below2(v, t);
                t3 += below1(u, t) && below2(t, v);
                t4 += below1(t, u) && below2(t, v);
            }
        }
    const double triple = static_cast<double>(n) * (n - 1) * (n - 2);
    const double dbl = static_cast<double>(n) * (n - 1);
    return {t1 / triple, t2 / triple, t3 / triple, t4 / triple, v1 / dbl, v2 / dbl};
}

double sigma_hat_entry(const DataMatrix& data, const TauEstimate& tau, int r, int s) {
    data.validate();
    const int n = data.n();
    if (n < 3) throw std::invalid_argument("sigma_hat_entry: need n >= 3");
    PairIndex idx(data.d());
    auto [i1, j1] = idx.to_pair(r);
    auto [i2, j2] = idx.to_pair(s);
    const Eigen::MatrixXd m1 = concordance_m(data, i1, j1);
    const Eigen::MatrixXd m2 = (r == s) ? m1 : concordance_m(data, i2, j2);
    // Triple and double U-statistic sums collapse into one expression:
    // 1^T M1 M2 1 - (1/2) 1^T (M1 o M2) 1.
    const double total =
        m1.rowwise().sum().dot(m2.rowwise().sum()) - 0.5 * m1.cwiseProduct(m2).sum();
    return entry_scale(n) * total -
           rank_one_factor(n) * (tau.tau[r] + 1.0) * (tau.tau[s] + 1.0);
}

SigmaEstimate sigma_hat(const DataMatrix& data, const TauEstimate& tau, SigmaMode mode) {
    data.validate();
    const int n = data.n(), d = data.d();
    if (n < 3) throw std::invalid_argument("sigma_hat: need n >= 3");
    if (tau.d != d || tau.n != n)
        throw std::invalid_argument("sigma_hat: tau estimate does not match the data");
    PairIndex idx(d);
    const int p = idx.pair_count();
    if (mode == SigmaMode::Full && p > 10000)
        throw CapacityError("sigma_hat: p = " + std::to_string(p) +
                            " exceeds the dense guard (10000); use Diagonal mode");

    const double scale = entry_scale(n);
    const double c = rank_one_factor(n);

    // One sweep over row pairs (a, b). Row a's concordance pattern across
    // all column pairs comes from the sign vector of row b - row a:
    // pair r = (i, j) is concordant iff the signs at i and j agree.
    // S(t, r) accumulates the concordance count of row t in pair r;
    // H = sum of c c^T over row pairs gives the Hadamard correction.
    Eigen::MatrixXd s_counts = Eigen::MatrixXd::Zero(n, p);
    Eigen::MatrixXd hadamard;
    const bool full = mode == SigmaMode::Full;
    if (full) hadamard = Eigen::MatrixXd::Zero(p, p);

    const int chunk = full ? std::max(1, 4 * 1024 * 1024 / (8 * p)) : 1;
    Eigen::MatrixXd block(full ? chunk : 0, full ? p : 0);
    int filled = 0;

    std::vector<signed char> sign(d);
    Eigen::VectorXd conc(p);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            for (int i = 0; i < d; ++i)
                sign[i] = data.values(a, i) < data.values(b, i) ? 1 : -1;
            for (int r = 0; r < p; ++r) {
                auto [i, j] = idx.to_pair(r);
                const double v = sign[i] == sign[j] ? 1.0 : 0.0;
                conc[r] = v;
                s_counts(a, r) += v;
                s_counts(b, r) += v;
            }
            if (full) {
                block.row(filled++) = conc;
                if (filled == chunk) {
                    hadamard.noalias() += block.transpose() * block;
                    filled = 0;
                }
            }
        }

    SigmaEstimate out;
    out.n = n;
    const Eigen::VectorXd bump = tau.tau.array() + 1.0;
    if (full) {
        if (filled > 0)
            hadamard.noalias() += block.topRows(filled).transpose() * block.topRows(filled);
        out.kind = SigmaMode::Full;
        out.full.noalias() = s_counts.transpose() * s_counts;
        out.full = scale * (out.full - hadamard) - c * bump * bump.transpose();
        out.full = 0.5 * (out.full + out.full.transpose()).eval();  // exact symmetry
    } else {
        out.kind = SigmaMode::Diagonal;
    }
    // diagonal entries always go through the same per-entry expression,
    // so Diagonal mode matches the diagonal of Full mode bitwise
    Eigen::VectorXd diag(p);
    for (int r = 0; r < p; ++r) {
        const double total =
            s_counts.col(r).squaredNorm() - 0.5 * s_counts.col(r).sum();
        diag[r] = scale * total - c * bump[r] * bump[r];
    }
    if (full)
        out.full.diagonal() = diag;
    else
        out.diag = std::move(diag);
    return out;
}

SigmaEstimate sigma_tilde(const SigmaEstimate& hat, const TauEstimate& tau_hat,
                          const Eigen::VectorXd& tau_tilde, const BlockStructure& bs) {
    const int p = bs.pair_count();
    if (hat.p() != p || tau_hat.tau.size() != p || tau_tilde.size() != p)
        throw std::invalid_argument("sigma_tilde: dimension mismatch");
    const double c = rank_one_factor(hat.n);

    SigmaEstimate out;
    out.kind = hat.kind;
    out.n = hat.n;
    if (hat.kind == SigmaMode::Diagonal) {
        // Diagonal cells inside one pair block are exactly its (r, r)
        // entries, so averaging reduces to block means.
        Eigen::VectorXd theta = hat.diag;
        for (int r = 0; r < p; ++r) {
            const double b = tau_hat.tau[r] + 1.0;
            theta[r] += c * b * b;
        }
        Eigen::VectorXd avg = bs.gamma_apply(theta);
        out.diag.resize(p);
        for (int r = 0; r < p; ++r) {
            const double b = tau_tilde[r] + 1.0;
            out.diag[r] = avg[r] - c * b * b;
        }
    } else {
        const Eigen::VectorXd bump = tau_hat.tau.array() + 1.0;
        Eigen::MatrixXd theta = hat.full + c * bump * bump.transpose();
        const Eigen::VectorXd bt = tau_tilde.array() + 1.0;
        out.full.resize(p, p);
        // one value per cell, assigned to every member: the result is
        // cell-constant bitwise, not just up to rounding
        for (const auto& [key, members] : sigma_cells(bs)) {
            double sum = 0.0;
            for (auto [r, s] : members) sum += theta(r, s);
            const double mean = sum / static_cast<double>(members.size());
            const auto [r0, s0] = members.front();
            const double value = mean - c * bt[r0] * bt[s0];
            for (auto [r, s] : members) {
                out.full(r, s) = value;
                out.full(s, r) = value;
            }
        }
    }
    return out;
}

SigmaEstimate shrink(const SigmaEstimate& sigma, ShrinkageWeight w) {
    if (sigma.kind == SigmaMode::Diagonal) return sigma;
    SigmaEstimate out;
    out.n = sigma.n;
    if (w.w == 1.0) {
        out.kind = SigmaMode::Diagonal;
        out.diag = sigma.full.diagonal();
        return out;
    }
    out.kind = SigmaMode::Full;
    out.full = (1.0 - w.w) * sigma.full;
    out.full.diagonal() = sigma.full.diagonal();
    return out;
}

Eigen::VectorXd solve_sigma(const SigmaEstimate& sigma, const Eigen::VectorXd& v) {
    const int p = sigma.p();
    if (v.size() != p) throw std::invalid_argument("solve_sigma: length mismatch");
    if (sigma.kind == SigmaMode::Diagonal) {
        Eigen::VectorXd x(p);
        for (int r = 0; r < p; ++r) {
            if (sigma.diag[r] == 0.0)
                throw SingularityError(
                    "solve_sigma: zero variance entry at pair index " +
                    std::to_string(r + 1));
            x[r] = v[r] / sigma.diag[r];
        }
        return x;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma.full);
    if (!(lu.rcond() > 1e-12))
        throw SingularityError(
            "solve_sigma: covariance matrix is numerically singular; "
            "increase the shrinkage weight w");
    return lu.solve(v);
}

}  // namespace blocktau
