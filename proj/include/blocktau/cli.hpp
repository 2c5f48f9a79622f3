#pragma once

#include <string>
#include <vector>

#include "blocktau/io.hpp"

namespace blocktau {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitTies = 3;
inline constexpr int kExitSingular = 4;
inline constexpr int kExitCapacity = 5;

enum class CovarianceMode { Full, Diagonal, Auto };

struct FitConfig {
    std::string input;
    std::string output;      // empty = stdout
    char delimiter = ',';
    bool header = false;
    double w = 0.0;
    double alpha = 0.05;
    CovarianceMode mode = CovarianceMode::Auto;
    bool emit_matrices = false;
    std::uint64_t seed = 0;  // reserved; fit is deterministic
};

struct SimulateConfig {
    std::string scenario_file;  // either this or preset
    std::string preset;
    std::string output;  // empty = stdout
};

struct TransformConfig {
    std::string input;          // d x d Kendall matrix, CSV
    std::string partition_file; // JSON clusters (1-based)
    std::string output;         // empty = stdout
    char delimiter = ',';
    bool header = false;
    bool shrink_correlation = false;  // identity-shrink fix for the inverse
};

/// Structure detection on a CSV dataset; writes a JSON report.
int cmd_fit(const FitConfig& config);

/// Runs a simulation study; writes JSON lines (one record per
/// replicate, one trailing aggregate line).
int cmd_simulate(const SimulateConfig& config);

/// Kendall matrix -> linear correlation and block precision matrix.
int cmd_transform(const TransformConfig& config);

}  // namespace blocktau
