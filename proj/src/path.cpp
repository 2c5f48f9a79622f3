#include "blocktau/path.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace blocktau {

namespace {

// Regularized upper incomplete gamma Q(a, z): series below a + 1,
// modified Lentz continued fraction above.
double gamma_q(double a, double z) {
    if (z <= 0.0) return 1.0;
    const double log_prefactor = -z + a * std::log(z) - std::lgamma(a);
    if (z < a + 1.0) {
        double term = 1.0 / a, sum = term, k = a;
        for (int it = 0; it < 10000; ++it) {
            k += 1.0;
            term *= z / k;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - sum * std::exp(log_prefactor);
    }
    const double tiny = 1e-300;
    double b = z + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(log_prefactor) * h;
}

// Scores every pairwise merge of g against a diagonal covariance whose
// entries are constant on g's pair blocks. Sufficient statistics per
// block (sum, sum of squares, count of tau-hat entries, covariance
// value) make one candidate O(K): only the blocks touching the two
// merged clusters change, and a merged block's contribution follows
// from the parents' sums.
class DiagonalScorer {
public:
    DiagonalScorer(const BlockStructure& bs, const Eigen::VectorXd& tau,
                   const Eigen::VectorXd& sigma_diag)
        : k_(bs.source().cluster_count()), label_(k_ * k_, -1) {
        const int big_l = bs.block_count();
        s_.assign(big_l, 0.0);
        q_.assign(big_l, 0.0);
        count_.assign(big_l, 0);
        sigma_.assign(big_l, 0.0);
        base_.assign(big_l, 0.0);
        for (int r = 0; r < bs.pair_count(); ++r) {
            const int ell = bs.block_of(r);
            s_[ell] += tau[r];
            q_[ell] += tau[r] * tau[r];
            ++count_[ell];
        }
        base_total_ = 0.0;
        for (int ell = 0; ell < big_l; ++ell) {
            sigma_[ell] = sigma_diag[bs.blocks()[ell].front()];
            if (sigma_[ell] == 0.0)
                throw SingularityError("zero covariance entry in block " +
                                       std::to_string(ell + 1));
            base_[ell] = (q_[ell] - s_[ell] * s_[ell] / count_[ell]) / sigma_[ell];
            base_total_ += base_[ell];
            auto [k1, k2] = bs.block_clusters(ell);
            label_[k1 * k_ + k2] = label_[k2 * k_ + k1] = ell;
        }
    }

    double score(int a, int b) const {
        double delta = 0.0;
        int members[3];
        for (int k = 0; k < k_; ++k) {
            if (k == a || k == b) continue;
            members[0] = label_[a * k_ + k];
            members[1] = label_[b * k_ + k];
            delta += union_contribution(members, 2);
        }
        int m = 0;
        members[m++] = label_[a * k_ + b];
        if (label_[a * k_ + a] >= 0) members[m++] = label_[a * k_ + a];
        if (label_[b * k_ + b] >= 0) members[m++] = label_[b * k_ + b];
        delta += union_contribution(members, m);
        return base_total_ + delta;
    }

private:
    double union_contribution(const int* ells, int m) const {
        double s = 0.0;
        long long c = 0;
        for (int t = 0; t < m; ++t) {
            s += s_[ells[t]];
            c += count_[ells[t]];
        }
        const double mean = s / static_cast<double>(c);
        double contrib = 0.0;
        for (int t = 0; t < m; ++t) {
            const int ell = ells[t];
            contrib += (q_[ell] - 2.0 * mean * s_[ell] + count_[ell] * mean * mean) /
                           sigma_[ell] -
                       base_[ell];
        }
        return contrib;
    }

    int k_;
    std::vector<int> label_;
    std::vector<double> s_, q_, sigma_, base_;
    std::vector<long long> count_;
    double base_total_;
};

[[noreturn]] void rethrow_at_step(const SingularityError& e, int clusters) {
    throw SingularityError("covariance singular at the path step with " +
                           std::to_string(clusters) + " clusters (" + e.what() +
                           "); increase the shrinkage weight w");
}

}  // namespace

PathResult build_path(const TauEstimate& tau_hat, const DataMatrix& data,
                      ShrinkageWeight w, SigmaMode mode) {
    const int d = tau_hat.d;
    if (data.d() != d || data.n() != tau_hat.n)
        throw std::invalid_argument("build_path: data does not match the tau estimate");
    const SigmaEstimate hat = sigma_hat(data, tau_hat, mode);

    PathResult path;
    path.w = w.w;
    path.partitions.reserve(d);
    path.losses.reserve(d);
    path.taus.reserve(d);

    Partition g = Partition::singletons(d);
    while (true) {
        const int clusters = g.cluster_count();
        BlockStructure bs(g);
        BlockTauEstimate bt = project_tau(tau_hat, g);
        const SigmaEstimate cov =
            shrink(sigma_tilde(hat, tau_hat, bt.tau_tilde, bs), w);
        try {
            path.losses.push_back(loss(bt.tau_tilde, tau_hat, cov));
        } catch (const SingularityError& e) {
            rethrow_at_step(e, clusters);
        }
        path.partitions.push_back(g);
        path.taus.push_back(std::move(bt));
        if (clusters == 1) break;

        int best_a = -1, best_b = -1;
        double best = std::numeric_limits<double>::infinity();
        try {
            if (cov.kind == SigmaMode::Diagonal) {
                DiagonalScorer scorer(bs, tau_hat.tau, cov.diag);
                for (int a = 0; a < clusters; ++a)
                    for (int b = a + 1; b < clusters; ++b) {
                        const double value = scorer.score(a, b);
                        if (value < best) {
                            best = value;
                            best_a = a;
                            best_b = b;
                        }
                    }
            } else {
                Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov.full);
                if (!(lu.rcond() > 1e-12))
                    throw SingularityError("covariance matrix is numerically singular");
                for (int a = 0; a < clusters; ++a)
                    for (int b = a + 1; b < clusters; ++b) {
                        const Eigen::VectorXd diff =
                            tau_hat.tau -
                            project_tau(tau_hat, g.merge(a, b)).tau_tilde;
                        const double value = diff.dot(lu.solve(diff));
                        if (value < best) {
                            best = value;
                            best_a = a;
                            best_b = b;
                        }
                    }
            }
        } catch (const SingularityError& e) {
            rethrow_at_step(e, clusters);
        }
        g = g.merge(best_a, best_b);
    }
    path.alphas = alpha_values(path);
    return path;
}

std::vector<double> alpha_values(const PathResult& path) {
    const int d = path.dim();
    const int p = d * (d - 1) / 2;
    std::vector<double> alphas(d);
    for (int j = 0; j < d; ++j) {
        const int big_l = BlockStructure(path.partitions[j]).block_count();
        const int df = p - big_l;
        alphas[j] = df == 0 ? 1.0 : chi_square_sf(path.losses[j], df);
    }
    return alphas;
}

SelectedStructure select_structure(const PathResult& path, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("select_structure: level must be in (0, 1)");
    const int d = path.dim();
    for (int clusters = 1; clusters <= d; ++clusters) {
        const int j = path.index_for(clusters);
        if (path.alphas[j] >= alpha) return {clusters, path.partitions[j]};
    }
    return {d, path.partitions[0]};  // unreachable: the singleton alpha is 1
}

double chi_square_sf(double x, int df) {
    if (x < 0.0) throw std::invalid_argument("chi_square_sf: x must be >= 0");
    if (df < 1) throw std::invalid_argument("chi_square_sf: df must be >= 1");
    const double q = gamma_q(df / 2.0, x / 2.0);
    return std::min(1.0, std::max(0.0, q));
}

}  // namespace blocktau
