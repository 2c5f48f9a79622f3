#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "blocktau/errors.hpp"
#include "blocktau/pairs.hpp"

namespace blocktau {

/// Disjoint cover of the variable indices {0..d-1} by nonempty clusters.
/// Canonical form: clusters ordered by smallest member, members ascending.
class Partition {
public:
    /// Canonicalizes on construction; throws if the clusters do not
    /// partition {0..d-1}.
    Partition(int d, std::vector<std::vector<int>> clusters);

    static Partition singletons(int d);
    static Partition single_cluster(int d);

    int dim() const { return d_; }
    int cluster_count() const { return static_cast<int>(clusters_.size()); }
    const std::vector<std::vector<int>>& clusters() const { return clusters_; }
    /// Cluster label (position in canonical order) of variable i.
    int cluster_of(int i) const { return cluster_of_[i]; }

    bool operator==(const Partition& o) const {
        return d_ == o.d_ && clusters_ == o.clusters_;
    }

    /// Merge the clusters at canonical positions a and b.
    Partition merge(int a, int b) const;

private:
    int d_;
    std::vector<std::vector<int>> clusters_;
    std::vector<int> cluster_of_;
};

/// d x d binary cluster membership matrix: entry 1 iff the two
/// variables share a cluster.
Eigen::MatrixXd delta_matrix(const Partition& g);

/// True iff finer has strictly more clusters and each of its clusters
/// is contained in some cluster of coarser.
bool is_refinement(const Partition& finer, const Partition& coarser);

/// Overlap pattern of two index pairs, expressed through cluster labels
/// (1-based, 0 = no shared index): (0,0) disjoint, (0,k) one shared
/// index in cluster k, (k1,k2) both indices shared.
using VarphiKey = std::pair<int, int>;

/// Partition of the pair indices {0..p-1} induced by a variable
/// partition: block B_{k1 k2} collects the pairs with one endpoint in
/// cluster k1 and the other in k2. Blocks are labeled canonically by
/// ascending (k1, k2).
class BlockStructure {
public:
    explicit BlockStructure(Partition g);

    const Partition& source() const { return source_; }
    const PairIndex& pairs() const { return pairs_; }
    int pair_count() const { return pairs_.pair_count(); }
    int block_count() const { return L_; }
    int block_of(int r) const { return block_of_[r]; }
    int block_size(int ell) const { return block_sizes_[ell]; }
    /// Cluster-label pair (k1 <= k2, 0-based) of block ell.
    std::pair<int, int> block_clusters(int ell) const { return block_clusters_[ell]; }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }

    /// Gamma v where Gamma = B B^+ replaces every entry by the mean of
    /// its block. O(p), Gamma is never materialized.
    Eigen::VectorXd gamma_apply(const Eigen::VectorXd& v) const;

    /// Dense p x p projector Gamma; guarded to p <= 10^4.
    Eigen::MatrixXd gamma_matrix() const;

    /// Ordered block-label pair of (r, s).
    std::pair<int, int> phi(int r, int s) const;

    /// Index-overlap pattern of (r, s); labels are 1-based cluster
    /// positions, 0 marking "no shared index".
    VarphiKey varphi(int r, int s) const;

private:
    Partition source_;
    PairIndex pairs_;
    int L_;
    std::vector<int> block_of_;
    std::vector<int> block_sizes_;
    std::vector<std::pair<int, int>> block_clusters_;
    std::vector<std::vector<int>> blocks_;
};

/// Cell key of the covariance structure: block-label pair plus overlap
/// pattern.
struct SigmaCellKey {
    std::pair<int, int> phi;
    VarphiKey varphi;
    auto operator<=>(const SigmaCellKey&) const = default;
};

/// Enumerate the cells partitioning {(r,s): r <= s}; entries of any
/// matrix in S_G are constant on each cell. Guarded to p <= 10^4.
std::map<SigmaCellKey, std::vector<std::pair<int, int>>> sigma_cells(const BlockStructure& bs);

}  // namespace blocktau
