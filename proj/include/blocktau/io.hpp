#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "blocktau/estimator.hpp"
#include "blocktau/kendall.hpp"
#include "blocktau/path.hpp"
#include "blocktau/simulate.hpp"

namespace blocktau {

/// Malformed input (CSV or config JSON); message carries the location.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvOptions {
    char delimiter = ',';
    bool header = false;
};

/// Numeric CSV with optional quoting ("" escapes a quote) and optional
/// header row. Rows must be rectangular; errors name the 1-based line.
DataMatrix parse_csv(std::istream& in, const CsvOptions& options);
DataMatrix read_csv(const std::string& path, const CsvOptions& options);

/// Clusters as arrays of 1-based variable indices.
nlohmann::json partition_to_json(const Partition& g);
Partition partition_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

/// Path steps as {clusters, partition, block_count, loss, alpha}.
nlohmann::json path_to_json(const PathResult& path);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

nlohmann::json replicate_record_to_json(const ReplicateRecord& rec);
nlohmann::json study_aggregates_to_json(const StudyResult& result,
                                        const std::vector<double>& alpha_levels);

/// Lower triangle of a Full covariance as a small binary blob:
/// 16-byte header (magic "SIGM", u32 p, u32 reserved), then row-major
/// little-endian doubles.
void write_sigma_dump(std::ostream& out, const SigmaEstimate& sigma);
SigmaEstimate read_sigma_dump(std::istream& in);

}  // namespace blocktau
