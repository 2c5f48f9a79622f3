#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blocktau/estimator.hpp"
#include "blocktau/path.hpp"

namespace blocktau {

enum class CopulaFamily { Normal, StudentT };

/// Simulation scenario: a block-constant population Kendall matrix with
/// its partition, the sampling family, and study parameters.
struct Scenario {
    Eigen::MatrixXd true_tau;  // d x d, in the block class of `partition`
    Partition partition{1, {{0}}};
    CopulaFamily family = CopulaFamily::Normal;
    int df = 1;  // StudentT degrees of freedom; 1 = Cauchy
    int n = 0;
    int replicates = 0;
    double w = 0.0;
    std::vector<double> alpha_levels;
    std::uint64_t seed = 0;

    /// Checks symmetry, unit diagonal, off-diagonal range (-1, 1),
    /// block-constancy for the declared partition, and positive
    /// definiteness of the sine-transformed correlation.
    void validate() const;
};

/// Deterministic counter-based random stream. Each draw advances a
/// splitmix64 counter, so streams seeded from distinct (seed,
/// replicate) values are independent of thread count and call order
/// elsewhere.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(seed) {}
    /// Seed of the independent stream for one replicate of a study.
    static std::uint64_t replicate_seed(std::uint64_t seed, int replicate);

    std::uint64_t next_u64();
    double next_uniform();   // (0, 1)
    double next_normal();    // Box-Muller, one value per call
    double next_gamma(double shape);  // unit scale, Marsaglia-Tsang

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// n x d elliptical copula sample whose population Kendall matrix is
/// scenario.true_tau: latent correlation sin(pi T / 2), Cholesky
/// coloring, Student-t scaling when requested.
DataMatrix sample_copula(const Scenario& scenario, int n, std::uint64_t stream_seed);

/// Oracle error reduction: 1 - (best squared path error) / (squared
/// error of tau-hat), both against the true vectorized tau. Throws on a
/// zero denominator.
double metric_nu2(const PathResult& path, const Eigen::VectorXd& true_tau_vector);

/// Error reduction at the step with `selected_clusters` clusters.
double metric_xi(const PathResult& path, int selected_clusters,
                 const Eigen::VectorXd& true_tau_vector);

struct ReplicateRecord {
    int replicate;
    double nu2;
    std::vector<double> xi;         // one per alpha level
    std::vector<int> selected;      // chosen cluster count per level
    bool contains_truth;
};

struct StudyResult {
    std::vector<ReplicateRecord> records;
    double nu2_mean = 0.0;
    std::vector<double> xi_mean;
    double contains_truth_rate = 0.0;
};

/// Full study: per-replicate sampling, path construction, metrics, and
/// plain-mean aggregates. Deterministic for a fixed scenario seed.
StudyResult run_study(const Scenario& scenario);

/// Named packaged scenarios ("k2-weak", "k3-clear", "toeplitz").
Scenario preset_scenario(const std::string& name);

}  // namespace blocktau
