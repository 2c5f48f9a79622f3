#include "blocktau/simulate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace blocktau {

namespace {

std::uint64_t splitmix_mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace

void Scenario::validate() const {
    const int d = partition.dim();
    if (true_tau.rows() != d || true_tau.cols() != d)
        throw std::invalid_argument("Scenario: tau matrix does not match the partition");
    if (n < 2) throw std::invalid_argument("Scenario: n must be >= 2");
    if (replicates < 0) throw std::invalid_argument("Scenario: negative replicate count");
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("Scenario: w outside [0, 1]");
    if (family == CopulaFamily::StudentT && df < 1)
        throw std::invalid_argument("Scenario: StudentT needs df >= 1");
    for (double a : alpha_levels)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("Scenario: alpha level outside (0, 1)");
    for (int i = 0; i < d; ++i) {
        if (true_tau(i, i) != 1.0)
            throw std::invalid_argument("Scenario: tau diagonal must be 1");
        for (int j = i + 1; j < d; ++j) {
            if (std::abs(true_tau(i, j) - true_tau(j, i)) > 1e-12)
                throw std::invalid_argument("Scenario: tau matrix not symmetric");
            if (!(std::abs(true_tau(i, j)) < 1.0))
                throw std::invalid_argument("Scenario: off-diagonal tau outside (-1, 1)");
        }
    }
    BlockStructure bs(partition);
    const PairIndex& idx = bs.pairs();
    const Eigen::VectorXd v = idx.vectorize(true_tau);
    for (int ell = 0; ell < bs.block_count(); ++ell) {
        const double ref = v[bs.blocks()[ell].front()];
        for (int r : bs.blocks()[ell])
            if (std::abs(v[r] - ref) > 1e-12)
                throw std::invalid_argument(
                    "Scenario: tau matrix is not block-constant for the partition");
    }
    const Eigen::MatrixXd p =
        (std::numbers::pi / 2.0 * true_tau.array()).sin().matrix();
    if (Eigen::LLT<Eigen::MatrixXd>(p).info() != Eigen::Success)
        throw std::invalid_argument(
            "Scenario: sine-transformed correlation is not positive definite");
}

std::uint64_t RandomStream::replicate_seed(std::uint64_t seed, int replicate) {
    return splitmix_mix(seed ^ (0x9E3779B97F4A7C15ull *
                                (static_cast<std::uint64_t>(replicate) + 1)));
}

std::uint64_t RandomStream::next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return splitmix_mix(state_);
}

double RandomStream::next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::next_normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u = next_uniform(), v = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * v;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

double RandomStream::next_gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be > 0");
    if (shape < 1.0)
        return next_gamma(shape + 1.0) * std::pow(next_uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        const double x = next_normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = next_uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

DataMatrix sample_copula(const Scenario& scenario, int n, std::uint64_t stream_seed) {
    const int d = scenario.partition.dim();
    const Eigen::MatrixXd corr =
        (std::numbers::pi / 2.0 * scenario.true_tau.array()).sin().matrix();
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(
            "sample_copula: latent correlation is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();

    RandomStream rng(stream_seed);
    DataMatrix data;
    data.values.resize(n, d);
    Eigen::VectorXd z(d);
    for (int row = 0; row < n; ++row) {
        for (int i = 0; i < d; ++i) z[i] = rng.next_normal();
        Eigen::VectorXd x = chol * z;
        if (scenario.family == CopulaFamily::StudentT) {
            const double chi2 = 2.0 * rng.next_gamma(scenario.df / 2.0);
            x *= std::sqrt(scenario.df / chi2);
        }
        data.values.row(row) = x.transpose();
    }
    return data;
}

double metric_nu2(const PathResult& path, const Eigen::VectorXd& true_tau_vector) {
    const Eigen::VectorXd& tau_hat = path.taus.front().tau_tilde;  // singleton step
    const double denom = (tau_hat - true_tau_vector).squaredNorm();
    if (denom == 0.0)
        throw std::invalid_argument("metric_nu2: tau-hat equals the truth exactly");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& bt : path.taus)
        best = std::min(best, (bt.tau_tilde - true_tau_vector).squaredNorm());
    return 1.0 - best / denom;
}

double metric_xi(const PathResult& path, int selected_clusters,
                 const Eigen::VectorXd& true_tau_vector) {
    const Eigen::VectorXd& tau_hat = path.taus.front().tau_tilde;
    const double denom = (tau_hat - true_tau_vector).squaredNorm();
    if (denom == 0.0)
        throw std::invalid_argument("metric_xi: tau-hat equals the truth exactly");
    const Eigen::VectorXd& chosen =
        path.taus[path.index_for(selected_clusters)].tau_tilde;
    return 1.0 - (chosen - true_tau_vector).squaredNorm() / denom;
}

StudyResult run_study(const Scenario& scenario) {
    scenario.validate();
    const int d = scenario.partition.dim();
    const int p = d * (d - 1) / 2;
    const SigmaMode mode = p <= 2000 ? SigmaMode::Full : SigmaMode::Diagonal;
    const Eigen::VectorXd truth = PairIndex(d).vectorize(scenario.true_tau);
    const ShrinkageWeight w(scenario.w);
    const int levels = static_cast<int>(scenario.alpha_levels.size());

    StudyResult out;
    out.xi_mean.assign(levels, 0.0);
    for (int rep = 0; rep < scenario.replicates; ++rep) {
        const DataMatrix data = sample_copula(
            scenario, scenario.n, RandomStream::replicate_seed(scenario.seed, rep));
        const TauEstimate tau = kendall_tau(data);
        const PathResult path = build_path(tau, data, w, mode);

        ReplicateRecord rec;
        rec.replicate = rep;
        rec.nu2 = metric_nu2(path, truth);
        rec.contains_truth = false;
        for (const auto& g : path.partitions)
            if (g == scenario.partition) rec.contains_truth = true;
        for (double level : scenario.alpha_levels) {
            const SelectedStructure sel = select_structure(path, level);
            rec.selected.push_back(sel.clusters);
            rec.xi.push_back(metric_xi(path, sel.clusters, truth));
        }

        out.nu2_mean += rec.nu2;
        for (int t = 0; t < levels; ++t) out.xi_mean[t] += rec.xi[t];
        if (rec.contains_truth) out.contains_truth_rate += 1.0;
        out.records.push_back(std::move(rec));
    }
    if (!out.records.empty()) {
        const double m = static_cast<double>(out.records.size());
        out.nu2_mean /= m;
        for (double& x : out.xi_mean) x /= m;
        out.contains_truth_rate /= m;
    }
    return out;
}

namespace {

// Block-constant Kendall matrix: within[k] on the diagonal blocks,
// between[q] on the off-diagonal blocks in canonical (k1, k2) order.
Eigen::MatrixXd block_tau(const Partition& g, const std::vector<double>& within,
                          const std::vector<double>& between) {
    const int d = g.dim();
    const int k = g.cluster_count();
    Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(d, d);
    int q = 0;
    for (int k1 = 0; k1 < k; ++k1)
        for (int k2 = k1; k2 < k; ++k2) {
            const double value = k1 == k2 ? within[k1] : between[q++];
            for (int i : g.clusters()[k1])
                for (int j : g.clusters()[k2])
                    if (i != j) tau(i, j) = tau(j, i) = value;
        }
    return tau;
}

}  // namespace

Scenario preset_scenario(const std::string& name) {
    Scenario s;
    if (name == "k2-weak") {
        s.partition = Partition(6, {{0, 1, 2}, {3, 4, 5}});
        s.true_tau = block_tau(s.partition, {0.3, 0.4}, {0.1});
        s.n = 1000;
        s.replicates = 500;
        s.w = 0.0;
        s.alpha_levels = {0.05};
        s.seed = 20260825;
    } else if (name == "k3-clear") {
        s.partition = Partition(10, {{0, 1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
        s.true_tau = block_tau(s.partition, {0.37, 0.42, 0.39}, {0.24, 0.19, 0.28});
        s.n = 500;
        s.replicates = 100;
        s.w = 0.75;
        s.alpha_levels = {0.05};
        s.seed = 4242;
    } else if (name == "toeplitz") {
        const int d = 10;
        s.partition = Partition::singletons(d);
        s.true_tau.resize(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                s.true_tau(i, j) = std::pow(0.4, std::abs(i - j));
        s.n = 250;
        s.replicates = 100;
        s.w = 0.75;
        s.alpha_levels = {0.05};
        s.seed = 7;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    s.validate();
    return s;
}

}  // namespace blocktau
