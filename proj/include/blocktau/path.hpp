#pragma once

#include <vector>

#include "blocktau/covariance.hpp"
#include "blocktau/estimator.hpp"

namespace blocktau {

/// Greedy merge path from the singleton partition down to one cluster.
/// Index j holds the step with d - j clusters: partitions[0] is all
/// singletons, partitions[d-1] the single cluster, and each entry
/// refines the next.
struct PathResult {
    std::vector<Partition> partitions;
    std::vector<double> losses;   // loss of tau-tilde under that step's covariance
    std::vector<double> alphas;
    std::vector<BlockTauEstimate> taus;
    double w = 0.0;

    int dim() const { return static_cast<int>(partitions.size()); }
    /// Index of the step with the given cluster count.
    int index_for(int clusters) const { return dim() - clusters; }
};

/// Agglomerative path construction. At each step every pairwise merge
/// of the current partition is scored against the current shrunk
/// block-averaged covariance; the minimizer is kept (ties broken by
/// smallest canonical cluster-label pair) and the covariance is then
/// re-averaged for the winner. The plug-in covariance itself is
/// computed from the data once.
PathResult build_path(const TauEstimate& tau_hat, const DataMatrix& data,
                      ShrinkageWeight w, SigmaMode mode);

/// Per-step upper-tail probabilities of the chi-square reference with
/// p - L_i degrees of freedom; df = 0 (singleton step) maps to 1.
std::vector<double> alpha_values(const PathResult& path);

struct SelectedStructure {
    int clusters;  // i, the cluster count of the chosen step
    Partition partition;
};

/// Coarsest step (smallest cluster count) whose alpha reaches the
/// level; falls back to the singleton partition.
SelectedStructure select_structure(const PathResult& path, double alpha);

/// Upper-tail probability of the chi-square distribution, via the
/// regularized incomplete gamma function; absolute error <= 1e-10.
double chi_square_sf(double x, int df);

}  // namespace blocktau
