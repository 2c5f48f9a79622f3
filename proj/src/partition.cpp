#include "blocktau/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace blocktau {

Partition::Partition(int d, std::vector<std::vector<int>> clusters) : d_(d) {
    if (d < 1) throw std::invalid_argument("Partition: dimension must be >= 1");
    std::vector<char> seen(d, 0);
    for (auto& c : clusters) {
        if (c.empty()) throw std::invalid_argument("Partition: empty cluster");
        std::sort(c.begin(), c.end());
        for (int i : c) {
            if (i < 0 || i >= d)
                throw std::invalid_argument("Partition: index " + std::to_string(i + 1) +
                                            " outside 1.." + std::to_string(d));
            if (seen[i])
                throw std::invalid_argument("Partition: index " + std::to_string(i + 1) +
                                            " appears twice");
            seen[i] = 1;
        }
    }
    for (int i = 0; i < d; ++i)
        if (!seen[i])
            throw std::invalid_argument("Partition: index " + std::to_string(i + 1) +
                                        " missing");
    std::sort(clusters.begin(), clusters.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    clusters_ = std::move(clusters);
    cluster_of_.assign(d, -1);
    for (int k = 0; k < static_cast<int>(clusters_.size()); ++k)
        for (int i : clusters_[k]) cluster_of_[i] = k;
}

Partition Partition::singletons(int d) {
    std::vector<std::vector<int>> cs(d);
    for (int i = 0; i < d; ++i) cs[i] = {i};
    return Partition(d, std::move(cs));
}

Partition Partition::single_cluster(int d) {
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    return Partition(d, {all});
}

Partition Partition::merge(int a, int b) const {
    const int k = cluster_count();
    if (a < 0 || b < 0 || a >= k || b >= k || a == b)
        throw std::invalid_argument("Partition::merge: invalid cluster labels");
    std::vector<std::vector<int>> cs;
    cs.reserve(k - 1);
    std::vector<int> merged = clusters_[a];
    merged.insert(merged.end(), clusters_[b].begin(), clusters_[b].end());
    cs.push_back(std::move(merged));
    for (int i = 0; i < k; ++i)
        if (i != a && i != b) cs.push_back(clusters_[i]);
    return Partition(d_, std::move(cs));
}

Eigen::MatrixXd delta_matrix(const Partition& g) {
    const int d = g.dim();
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            delta(i, j) = (g.cluster_of(i) == g.cluster_of(j)) ? 1.0 : 0.0;
    return delta;
}

bool is_refinement(const Partition& finer, const Partition& coarser) {
    if (finer.dim() != coarser.dim())
        throw std::invalid_argument("is_refinement: dimension mismatch");
    if (finer.cluster_count() <= coarser.cluster_count()) return false;
    for (const auto& c : finer.clusters()) {
        const int target = coarser.cluster_of(c.front());
        for (int i : c)
            if (coarser.cluster_of(i) != target) return false;
    }
    return true;
}

BlockStructure::BlockStructure(Partition g)
    : source_(std::move(g)), pairs_(source_.dim()) {
    const int k = source_.cluster_count();
    const int p = pairs_.pair_count();
    // canonical block labels: ascending (k1, k2), nonempty only
    std::vector<int> label(k * k, -1);
    L_ = 0;
    for (int k1 = 0; k1 < k; ++k1) {
        if (source_.clusters()[k1].size() > 1) {
            label[k1 * k + k1] = L_++;
            block_clusters_.emplace_back(k1, k1);
        }
        for (int k2 = k1 + 1; k2 < k; ++k2) {
            label[k1 * k + k2] = L_++;
            block_clusters_.emplace_back(k1, k2);
        }
    }
    block_of_.resize(p);
    block_sizes_.assign(L_, 0);
    blocks_.resize(L_);
    for (int r = 0; r < p; ++r) {
        auto [i, j] = pairs_.to_pair(r);
        int k1 = source_.cluster_of(i);
        int k2 = source_.cluster_of(j);
        if (k1 > k2) std::swap(k1, k2);
        const int ell = label[k1 * k + k2];
        block_of_[r] = ell;
        ++block_sizes_[ell];
        blocks_[ell].push_back(r);
    }
}

Eigen::VectorXd BlockStructure::gamma_apply(const Eigen::VectorXd& v) const {
    const int p = pair_count();
    if (v.size() != p)
        throw std::invalid_argument("gamma_apply: vector length must be " +
                                    std::to_string(p));
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(L_);
    for (int r = 0; r < p; ++r) sums[block_of_[r]] += v[r];
    Eigen::VectorXd out(p);
    for (int r = 0; r < p; ++r) out[r] = sums[block_of_[r]] / block_sizes_[block_of_[r]];
    return out;
}

Eigen::MatrixXd BlockStructure::gamma_matrix() const {
    const int p = pair_count();
    if (p > 10000)
        throw CapacityError("gamma_matrix: p = " + std::to_string(p) +
                            " exceeds the dense guard (10000)");
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(p, p);
    for (int r = 0; r < p; ++r)
        for (int s : blocks_[block_of_[r]])
            gamma(r, s) = 1.0 / block_sizes_[block_of_[r]];
    return gamma;
}

std::pair<int, int> BlockStructure::phi(int r, int s) const {
    int l1 = block_of_[r], l2 = block_of_[s];
    if (l1 > l2) std::swap(l1, l2);
    return {l1, l2};
}

VarphiKey BlockStructure::varphi(int r, int s) const {
    auto [ir, jr] = pairs_.to_pair(r);
    auto [is, js] = pairs_.to_pair(s);
    int shared[2];
    int count = 0;
    for (int a : {ir, jr})
        if (a == is || a == js) shared[count++] = a;
    if (count == 0) return {0, 0};
    if (count == 1) return {0, source_.cluster_of(shared[0]) + 1};
    int k1 = source_.cluster_of(shared[0]) + 1;
    int k2 = source_.cluster_of(shared[1]) + 1;
    if (k1 > k2) std::swap(k1, k2);
    return {k1, k2};
}

std::map<SigmaCellKey, std::vector<std::pair<int, int>>> sigma_cells(const BlockStructure& bs) {
    const int p = bs.pair_count();
    if (p > 10000)
        throw CapacityError("sigma_cells: p = " + std::to_string(p) +
                            " exceeds the enumeration guard (10000)");
    std::map<SigmaCellKey, std::vector<std::pair<int, int>>> cells;
    for (int r = 0; r < p; ++r)
        for (int s = r; s < p; ++s)
            cells[{bs.phi(r, s), bs.varphi(r, s)}].emplace_back(r, s);
    return cells;
}

}  // namespace blocktau
