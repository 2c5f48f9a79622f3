#include "blocktau/estimator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blocktau {

void CorrelationMatrix::validate() const {
    const int n = d();
    if (n < 1 || values.cols() != n)
        throw std::invalid_argument("CorrelationMatrix: must be square");
    for (int i = 0; i < n; ++i) {
        if (std::abs(values(i, i) - 1.0) > 1e-12)
            throw std::invalid_argument("CorrelationMatrix: diagonal must be 1");
        for (int j = 0; j < n; ++j) {
            if (std::abs(values(i, j) - values(j, i)) > 1e-12)
                throw std::invalid_argument("CorrelationMatrix: not symmetric");
            if (std::abs(values(i, j)) > 1.0 + 1e-12)
                throw std::invalid_argument("CorrelationMatrix: entry outside [-1, 1]");
        }
    }
}

BlockTauEstimate project_tau(const TauEstimate& tau_hat, const Partition& g) {
    if (g.dim() != tau_hat.d)
        throw std::invalid_argument("project_tau: partition dimension mismatch");
    BlockStructure bs(g);
    BlockTauEstimate out{bs.gamma_apply(tau_hat.tau), g,
                         Eigen::VectorXd(bs.block_count())};
    for (int ell = 0; ell < bs.block_count(); ++ell)
        out.per_block_values[ell] = out.tau_tilde[bs.blocks()[ell].front()];
    return out;
}

double loss(const Eigen::VectorXd& t, const TauEstimate& tau_hat,
            const SigmaEstimate& sigma) {
    if (t.size() != tau_hat.tau.size())
        throw std::invalid_argument("loss: length mismatch");
    const Eigen::VectorXd diff = tau_hat.tau - t;
    return diff.dot(solve_sigma(sigma, diff));
}

Eigen::VectorXd weighted_projection_check(const TauEstimate& tau_hat, const Partition& g,
                                          const SigmaEstimate& sigma) {
    if (sigma.kind != SigmaMode::Full)
        throw std::invalid_argument("weighted_projection_check: Full sigma required");
    BlockStructure bs(g);
    const int p = bs.pair_count(), big_l = bs.block_count();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, big_l);
    for (int r = 0; r < p; ++r) b(r, bs.block_of(r)) = 1.0;

    Eigen::MatrixXd sinv_b(p, big_l);
    for (int ell = 0; ell < big_l; ++ell)
        sinv_b.col(ell) = solve_sigma(sigma, b.col(ell));
    const Eigen::VectorXd sinv_tau = solve_sigma(sigma, tau_hat.tau);
    const Eigen::MatrixXd gram = b.transpose() * sinv_b;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(gram);
    if (!(lu.rcond() > 1e-12))
        throw SingularityError("weighted_projection_check: singular normal equations");
    const Eigen::VectorXd star = lu.solve(b.transpose() * sinv_tau);
    return b * star;
}

CorrelationMatrix sine_transform(const CorrelationMatrix& tau_matrix) {
    tau_matrix.validate();
    // extended precision keeps reference points like tau = 1/3 -> rho = 1/2
    // exact after the final rounding to double
    CorrelationMatrix out{tau_matrix.values.unaryExpr([](double t) {
        return static_cast<double>(
            std::sin(std::numbers::pi_v<long double> * static_cast<long double>(t) / 2.0L));
    })};
    out.values.diagonal().setOnes();
    return out;
}

CorrelationMatrix inverse_sine_transform(const CorrelationMatrix& p) {
    p.validate();
    CorrelationMatrix out{p.values.unaryExpr([](double rho) {
        const long double r = std::clamp(rho, -1.0, 1.0);
        return static_cast<double>(2.0L / std::numbers::pi_v<long double> * std::asin(r));
    })};
    out.values.diagonal().setOnes();
    return out;
}

Eigen::MatrixXd precision_matrix(const CorrelationMatrix& p_tilde, const Partition& g,
                                 bool identity_shrink, double epsilon) {
    p_tilde.validate();
    const int d = p_tilde.d();
    if (g.dim() != d)
        throw std::invalid_argument("precision_matrix: partition dimension mismatch");
    Eigen::MatrixXd target = p_tilde.values;
    if (identity_shrink)
        target = (1.0 - epsilon) * target +
                 epsilon * Eigen::MatrixXd::Identity(d, d);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(target);
    if (!(lu.rcond() > 1e-12))
        throw SingularityError(
            "precision_matrix: correlation matrix is numerically singular; "
            "rerun with the identity-shrink option");
    Eigen::MatrixXd omega = lu.inverse();
    omega = 0.5 * (omega + omega.transpose()).eval();

    // Restore the block structure exactly: off-diagonal entries averaged
    // over the pair blocks, diagonal entries within clusters.
    BlockStructure bs(g);
    const PairIndex& idx = bs.pairs();
    Eigen::VectorXd off(idx.pair_count());
    for (int r = 0; r < idx.pair_count(); ++r) {
        auto [i, j] = idx.to_pair(r);
        off[r] = omega(i, j);
    }
    off = bs.gamma_apply(off);
    Eigen::MatrixXd out(d, d);
    for (int r = 0; r < idx.pair_count(); ++r) {
        auto [i, j] = idx.to_pair(r);
        out(i, j) = out(j, i) = off[r];
    }
    for (const auto& cluster : g.clusters()) {
        double sum = 0.0;
        for (int i : cluster) sum += omega(i, i);
        const double mean = sum / static_cast<double>(cluster.size());
        for (int i : cluster) out(i, i) = mean;
    }
    return out;
}

}  // namespace blocktau
