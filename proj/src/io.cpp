#include "blocktau/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace blocktau {

namespace {

// Splits the whole stream into records of fields, honoring quoted
// fields (with "" escapes and embedded delimiters/newlines). Records
// carry the line number they start on.
struct RawRecord {
    long line;
    std::vector<std::string> fields;
};

std::vector<RawRecord> split_records(std::istream& in, char delimiter) {
    std::string text(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>{});
    std::vector<RawRecord> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false, field_open = false;
    long line = 1, record_line = 1;

    const auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_open = false;
    };
    const auto end_record = [&] {
        if (field_open || !fields.empty()) {
            end_field();
            records.push_back({record_line, std::move(fields)});
            fields.clear();
        }
        record_line = line;
    };

    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        const char ch = text[pos];
        if (quoted) {
            if (ch == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    ++pos;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        if (ch == '"' && field.empty()) {
            quoted = true;
            field_open = true;
        } else if (ch == delimiter) {
            end_field();
            field_open = true;  // a delimiter always opens the next field
        } else if (ch == '\n') {
            ++line;
            end_record();
        } else if (ch == '\r') {
            // swallowed; \r\n handled by the \n branch
        } else {
            field += ch;
            field_open = true;
        }
    }
    if (quoted)
        throw ParseError("line " + std::to_string(record_line) +
                         ": unterminated quoted field");
    end_record();
    return records;
}

double parse_number(const std::string& raw, long line) {
    std::size_t start = raw.find_first_not_of(" \t");
    if (start == std::string::npos)
        throw ParseError("line " + std::to_string(line) + ": empty field");
    const std::size_t stop = raw.find_last_not_of(" \t") + 1;
    const std::string token = raw.substr(start, stop - start);
    char* tail = nullptr;
    const double value = std::strtod(token.c_str(), &tail);
    if (tail != token.c_str() + token.size())
        throw ParseError("line " + std::to_string(line) + ": not a number: '" +
                         token + "'");
    return value;
}

}  // namespace

DataMatrix parse_csv(std::istream& in, const CsvOptions& options) {
    std::vector<RawRecord> records = split_records(in, options.delimiter);
    if (options.header && !records.empty()) records.erase(records.begin());
    if (records.empty()) throw ParseError("no data rows");
    const std::size_t width = records.front().fields.size();
    DataMatrix data;
    data.values.resize(static_cast<int>(records.size()), static_cast<int>(width));
    for (std::size_t row = 0; row < records.size(); ++row) {
        const RawRecord& rec = records[row];
        if (rec.fields.size() != width)
            throw ParseError("line " + std::to_string(rec.line) + ": expected " +
                             std::to_string(width) + " fields, got " +
                             std::to_string(rec.fields.size()));
        for (std::size_t col = 0; col < width; ++col)
            data.values(static_cast<int>(row), static_cast<int>(col)) =
                parse_number(rec.fields[col], rec.line);
    }
    return data;
}

DataMatrix read_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    return parse_csv(in, options);
}

nlohmann::json partition_to_json(const Partition& g) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& cluster : g.clusters()) {
        nlohmann::json c = nlohmann::json::array();
        for (int i : cluster) c.push_back(i + 1);
        j.push_back(std::move(c));
    }
    return j;
}

Partition partition_from_json(const nlohmann::json& j) {
    try {
        std::vector<std::vector<int>> clusters;
        int d = 0;
        for (const auto& c : j) {
            std::vector<int> cluster;
            for (const auto& raw : c) {
                cluster.push_back(raw.get<int>() - 1);
                ++d;
            }
            clusters.push_back(std::move(cluster));
        }
        return Partition(d, std::move(clusters));
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid partition: ") + e.what());
    }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        j.push_back(std::move(row));
    }
    return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    try {
        const int rows = static_cast<int>(j.size());
        const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
        Eigen::MatrixXd m(rows, cols);
        for (int i = 0; i < rows; ++i) {
            if (static_cast<int>(j.at(i).size()) != cols)
                throw ParseError("ragged matrix");
            for (int k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid matrix: ") + e.what());
    }
}

nlohmann::json path_to_json(const PathResult& path) {
    nlohmann::json steps = nlohmann::json::array();
    for (int j = 0; j < path.dim(); ++j) {
        const int clusters = path.dim() - j;
        steps.push_back({{"clusters", clusters},
                         {"partition", partition_to_json(path.partitions[j])},
                         {"block_count",
                          BlockStructure(path.partitions[j]).block_count()},
                         {"loss", path.losses[j]},
                         {"alpha", path.alphas[j]}});
    }
    return steps;
}

Scenario scenario_from_json(const nlohmann::json& j) {
    try {
        Scenario s;
        s.partition = partition_from_json(j.at("partition"));
        s.true_tau = matrix_from_json(j.at("tau"));
        const std::string family = j.at("family").get<std::string>();
        if (family == "normal") {
            s.family = CopulaFamily::Normal;
        } else if (family == "studentt") {
            s.family = CopulaFamily::StudentT;
            s.df = j.at("df").get<int>();
        } else if (family == "cauchy") {
            s.family = CopulaFamily::StudentT;
            s.df = 1;
        } else {
            throw ParseError("unknown family: " + family);
        }
        s.n = j.at("n").get<int>();
        s.replicates = j.at("replicates").get<int>();
        s.w = j.at("w").get<double>();
        s.alpha_levels = j.at("alpha_levels").get<std::vector<double>>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid scenario: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("invalid scenario: ") + e.what());
    }
}

nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j{{"partition", partition_to_json(s.partition)},
                     {"tau", matrix_to_json(s.true_tau)},
                     {"n", s.n},
                     {"replicates", s.replicates},
                     {"w", s.w},
                     {"alpha_levels", s.alpha_levels},
                     {"seed", s.seed}};
    if (s.family == CopulaFamily::Normal) {
        j["family"] = "normal";
    } else {
        j["family"] = "studentt";
        j["df"] = s.df;
    }
    return j;
}

nlohmann::json replicate_record_to_json(const ReplicateRecord& rec) {
    return {{"replicate", rec.replicate},
            {"nu2", rec.nu2},
            {"xi", rec.xi},
            {"selected_clusters", rec.selected},
            {"contains_truth", rec.contains_truth}};
}

nlohmann::json study_aggregates_to_json(const StudyResult& result,
                                        const std::vector<double>& alpha_levels) {
    return {{"aggregate", true},
            {"replicates", result.records.size()},
            {"nu2_mean", result.nu2_mean},
            {"alpha_levels", alpha_levels},
            {"xi_mean", result.xi_mean},
            {"contains_truth_rate", result.contains_truth_rate}};
}

void write_sigma_dump(std::ostream& out, const SigmaEstimate& sigma) {
    if (sigma.kind != SigmaMode::Full)
        throw std::invalid_argument("write_sigma_dump: Full covariance required");
    const std::uint32_t p = static_cast<std::uint32_t>(sigma.p());
    const std::uint32_t reserved = 0;
    out.write("SIGM", 4);
    out.write(reinterpret_cast<const char*>(&p), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    const std::uint32_t pad = 0;
    out.write(reinterpret_cast<const char*>(&pad), 4);  // header is 16 bytes
    for (std::uint32_t i = 0; i < p; ++i)
        for (std::uint32_t j = 0; j <= i; ++j) {
            const double value = sigma.full(i, j);
            out.write(reinterpret_cast<const char*>(&value), 8);
        }
}

SigmaEstimate read_sigma_dump(std::istream& in) {
    char magic[4];
    std::uint32_t p = 0, reserved = 0, pad = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&p), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    in.read(reinterpret_cast<char*>(&pad), 4);
    if (!in || std::memcmp(magic, "SIGM", 4) != 0)
        throw ParseError("bad covariance dump header");
    SigmaEstimate sigma;
    sigma.kind = SigmaMode::Full;
    sigma.full.resize(p, p);
    for (std::uint32_t i = 0; i < p; ++i)
        for (std::uint32_t j = 0; j <= i; ++j) {
            double value = 0.0;
            in.read(reinterpret_cast<char*>(&value), 8);
            sigma.full(i, j) = sigma.full(j, i) = value;
        }
    if (!in) throw ParseError("truncated covariance dump");
    return sigma;
}

}  // namespace blocktau
