#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <sstream>

#include "blocktau/cli.hpp"

using blocktau::CsvOptions;
using blocktau::DataMatrix;
using blocktau::ParseError;
using blocktau::Partition;
using blocktau::Scenario;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("blocktau_test_" + name);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

DataMatrix parse(const std::string& text, CsvOptions options = {}) {
    std::istringstream in(text);
    return blocktau::parse_csv(in, options);
}

}  // namespace

TEST_CASE("csv parsing") {
    DataMatrix plain = parse("1,2\n3,4\n5,6\n");
    CHECK(plain.n() == 3);
    CHECK(plain.d() == 2);
    CHECK(plain.values(2, 1) == 6.0);

    // quoted fields, "" escape ignored for numbers but must not break
    // the field scanner, embedded delimiter inside quotes
    DataMatrix quoted = parse("\"1.5\",\"-2\"\n\"3e2\",4\n");
    CHECK(quoted.values(0, 0) == 1.5);
    CHECK(quoted.values(1, 0) == 300.0);

    // CRLF endings and trailing newline-free last row
    DataMatrix crlf = parse("1,2\r\n3,4\r\n5,6");
    CHECK(crlf.n() == 3);
    CHECK(crlf.values(2, 0) == 5.0);

    // blank lines are skipped
    CHECK(parse("1,2\n\n3,4\n\n").n() == 2);

    // header row and alternate delimiter
    DataMatrix with_header = parse("a;b\n1;2\n3;4\n", {';', true});
    CHECK(with_header.n() == 2);
    CHECK(with_header.values(0, 1) == 2.0);

    // whitespace around numbers is tolerated
    CHECK(parse(" 1 ,\t2\n3,4\n").values(0, 1) == 2.0);

    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("1,2\n3\n"), ParseError);
    try {
        parse("1,2\n3,4\n5\n");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("1,x\n"), ParseError);
    CHECK_THROWS_AS(parse("1,2\n3,\n"), ParseError);      // empty field
    CHECK_THROWS_AS(parse("\"1,2\n"), ParseError);        // unterminated quote
    CHECK_THROWS_AS(parse("1,2.5.6\n"), ParseError);      // trailing junk
    CHECK_THROWS_AS(blocktau::read_csv("/nonexistent/x.csv", {}), ParseError);
}

TEST_CASE("partition and matrix json round trips") {
    Partition g(5, {{0, 2}, {1}, {3, 4}});
    nlohmann::json j = blocktau::partition_to_json(g);
    CHECK(j == nlohmann::json::parse("[[1,3],[2],[4,5]]"));
    CHECK(blocktau::partition_from_json(j) == g);

    CHECK_THROWS_AS(blocktau::partition_from_json(nlohmann::json::parse("[[1,1]]")),
                    ParseError);
    CHECK_THROWS_AS(blocktau::partition_from_json(nlohmann::json::parse("[[1],[3]]")),
                    ParseError);
    CHECK_THROWS_AS(blocktau::partition_from_json(nlohmann::json::parse("[\"x\"]")),
                    ParseError);

    Eigen::MatrixXd m(2, 3);
    m << 1.5, -2.25, 0.0, 4.0, 5.0, -6.5;
    CHECK(blocktau::matrix_from_json(blocktau::matrix_to_json(m)) == m);
    CHECK_THROWS_AS(blocktau::matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")),
                    ParseError);
}

TEST_CASE("scenario json round trip") {
    Scenario s;
    s.partition = Partition(4, {{0, 1}, {2, 3}});
    s.true_tau.setIdentity(4, 4);
    s.true_tau(0, 1) = s.true_tau(1, 0) = 0.4;
    s.true_tau(2, 3) = s.true_tau(3, 2) = 0.4;
    for (int i : {0, 1})
        for (int j : {2, 3}) s.true_tau(i, j) = s.true_tau(j, i) = 0.1;
    s.family = blocktau::CopulaFamily::StudentT;
    s.df = 5;
    s.n = 100;
    s.replicates = 7;
    s.w = 0.25;
    s.alpha_levels = {0.05, 0.1};
    s.seed = 12345;

    Scenario back = blocktau::scenario_from_json(blocktau::scenario_to_json(s));
    CHECK(back.partition == s.partition);
    CHECK(back.true_tau == s.true_tau);
    CHECK(back.family == s.family);
    CHECK(back.df == 5);
    CHECK(back.n == 100);
    CHECK(back.replicates == 7);
    CHECK(back.w == 0.25);
    CHECK(back.alpha_levels == s.alpha_levels);
    CHECK(back.seed == 12345);

    // "cauchy" resolves to StudentT with df = 1
    nlohmann::json j = blocktau::scenario_to_json(s);
    j["family"] = "cauchy";
    j.erase("df");
    Scenario cauchy = blocktau::scenario_from_json(j);
    CHECK(cauchy.family == blocktau::CopulaFamily::StudentT);
    CHECK(cauchy.df == 1);

    j["family"] = "lognormal";
    CHECK_THROWS_AS(blocktau::scenario_from_json(j), ParseError);
    j.erase("family");
    CHECK_THROWS_AS(blocktau::scenario_from_json(j), ParseError);

    // invalid contents are rejected through the same channel
    nlohmann::json broken = blocktau::scenario_to_json(s);
    broken["tau"][0][1] = 0.7;  // asymmetric
    CHECK_THROWS_AS(blocktau::scenario_from_json(broken), ParseError);
}

TEST_CASE("covariance dump round trip") {
    blocktau::SigmaEstimate sigma;
    sigma.kind = blocktau::SigmaMode::Full;
    sigma.n = 50;
    sigma.full.resize(4, 4);
    sigma.full << 4, 1, 0.5, 0.25, 1, 3, 0.75, 0.5, 0.5, 0.75, 2, 1, 0.25, 0.5, 1, 5;

    std::ostringstream out(std::ios::binary);
    blocktau::write_sigma_dump(out, sigma);
    const std::string blob = out.str();
    CHECK(blob.size() == 16 + 8 * 10);  // header + lower triangle
    CHECK(blob.substr(0, 4) == "SIGM");

    std::istringstream in(blob);
    blocktau::SigmaEstimate back = blocktau::read_sigma_dump(in);
    CHECK(back.full == sigma.full);

    std::istringstream bad("XXXX" + blob.substr(4));
    CHECK_THROWS_AS(blocktau::read_sigma_dump(bad), ParseError);
    std::istringstream cut(blob.substr(0, blob.size() - 4));
    CHECK_THROWS_AS(blocktau::read_sigma_dump(cut), ParseError);

    blocktau::SigmaEstimate diag;
    diag.kind = blocktau::SigmaMode::Diagonal;
    diag.diag = Eigen::VectorXd::Ones(3);
    std::ostringstream sink(std::ios::binary);
    CHECK_THROWS_AS(blocktau::write_sigma_dump(sink, diag), std::invalid_argument);
}

TEST_CASE("fit command") {
    const fs::path csv = temp_file("fit_input.csv");
    const fs::path out = temp_file("fit_report.json");

    // two strongly (not perfectly) concordant columns merge into a
    // single cluster
    std::ostringstream rows;
    for (int i = 0; i < 30; ++i)
        rows << 0.1 * i << "," << 0.2 * i + ((i * 7) % 5) * 0.13 << "\n";
    write_file(csv, rows.str());

    blocktau::FitConfig config;
    config.input = csv.string();
    config.output = out.string();
    config.w = 0.5;
    CHECK(blocktau::cmd_fit(config) == blocktau::kExitOk);

    nlohmann::json report = nlohmann::json::parse(read_file(out));
    CHECK(report["schema_version"] == 1);
    CHECK(report["metadata"]["command"] == "fit");
    CHECK(report["metadata"]["n"] == 30);
    CHECK(report["metadata"]["d"] == 2);
    CHECK(report["metadata"]["mode"] == "full");
    CHECK(report["path"].size() == 2);
    CHECK(report["selected"]["clusters"] == 1);
    CHECK(report["selected"]["partition"] == nlohmann::json::parse("[[1,2]]"));
    CHECK(report["selected"]["tau_blocks"].size() == 1);
    CHECK(!report["selected"].contains("tau_tilde_matrix"));

    config.emit_matrices = true;
    CHECK(blocktau::cmd_fit(config) == blocktau::kExitOk);
    report = nlohmann::json::parse(read_file(out));
    CHECK(report["selected"].contains("tau_tilde_matrix"));
    CHECK(report["selected"].contains("linear_correlation"));
    CHECK(report["selected"].contains("precision"));
    CHECK(report["tau_hat"].contains("matrix"));

    // parse failures
    blocktau::FitConfig bad = config;
    bad.input = temp_file("fit_broken.csv").string();
    write_file(bad.input, "1,2\n3\n");
    CHECK(blocktau::cmd_fit(bad) == blocktau::kExitParse);
    bad.input = "/nonexistent/path.csv";
    CHECK(blocktau::cmd_fit(bad) == blocktau::kExitParse);
    bad = config;
    bad.w = 1.5;
    CHECK(blocktau::cmd_fit(bad) == blocktau::kExitParse);
    bad = config;
    bad.alpha = 0.0;
    CHECK(blocktau::cmd_fit(bad) == blocktau::kExitParse);

    // ties exit distinctly
    blocktau::FitConfig tied = config;
    tied.input = temp_file("fit_ties.csv").string();
    write_file(tied.input, "1,1\n1,2\n3,3\n4,5\n");
    CHECK(blocktau::cmd_fit(tied) == blocktau::kExitTies);

    // duplicated (monotone) column: singular covariance without shrinkage
    blocktau::FitConfig singular = config;
    singular.input = temp_file("fit_singular.csv").string();
    std::ostringstream srows;
    for (int i = 0; i < 20; ++i)
        srows << 0.3 * i + (i % 7) * 0.011 << "," << ((i * 13) % 20) * 0.05 << ","
              << 0.6 * i + (i % 7) * 0.022 << "\n";
    write_file(singular.input, srows.str());
    singular.w = 0.0;
    singular.mode = blocktau::CovarianceMode::Full;
    CHECK(blocktau::cmd_fit(singular) == blocktau::kExitSingular);

    // dense-mode capacity guard: d = 150 gives p = 11175 > 10^4
    blocktau::FitConfig wide = config;
    wide.input = temp_file("fit_wide.csv").string();
    std::ostringstream wrows;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 150; ++j)
            wrows << (j ? "," : "") << ((i * 150 + j) * 2654435761u % 100003) * 1e-5;
        wrows << "\n";
    }
    write_file(wide.input, wrows.str());
    wide.mode = blocktau::CovarianceMode::Full;
    CHECK(blocktau::cmd_fit(wide) == blocktau::kExitCapacity);
}

TEST_CASE("fit reports are byte-identical across runs") {
    const char* cli = std::getenv("BLOCKTAU_CLI");
    const char* fixtures = std::getenv("BLOCKTAU_FIXTURES");
    REQUIRE(cli != nullptr);
    REQUIRE(fixtures != nullptr);

    const fs::path input = "/tmp/blocktau_golden_40x4.csv";
    fs::copy_file(fs::path(fixtures) / "golden_40x4.csv", input,
                  fs::copy_options::overwrite_existing);
    const fs::path out1 = temp_file("golden_run1.json");
    const fs::path out2 = temp_file("golden_run2.json");
    const std::string base = std::string(cli) +
                             " fit --input " + input.string() +
                             " --shrinkage 0.5 --alpha 0.05 --emit-matrices --output ";
    REQUIRE(std::system((base + out1.string()).c_str()) == 0);
    REQUIRE(std::system((base + out2.string()).c_str()) == 0);

    const std::string frozen = read_file(fs::path(fixtures) / "golden_40x4_report.json");
    CHECK(read_file(out1) == frozen);
    CHECK(read_file(out2) == frozen);
}

TEST_CASE("simulate command") {
    Scenario s;
    s.partition = Partition(4, {{0, 1}, {2, 3}});
    s.true_tau.setIdentity(4, 4);
    s.true_tau(0, 1) = s.true_tau(1, 0) = 0.4;
    s.true_tau(2, 3) = s.true_tau(3, 2) = 0.4;
    for (int i : {0, 1})
        for (int j : {2, 3}) s.true_tau(i, j) = s.true_tau(j, i) = 0.1;
    s.n = 60;
    s.replicates = 3;
    s.w = 0.75;
    s.alpha_levels = {0.05};
    s.seed = 2024;

    const fs::path scenario_file = temp_file("scenario.json");
    write_file(scenario_file, blocktau::scenario_to_json(s).dump());
    const fs::path out = temp_file("simulate_out.jsonl");

    blocktau::SimulateConfig config;
    config.scenario_file = scenario_file.string();
    config.output = out.string();
    CHECK(blocktau::cmd_simulate(config) == blocktau::kExitOk);

    std::istringstream lines(read_file(out));
    std::string line;
    int records = 0;
    bool saw_aggregate = false;
    while (std::getline(lines, line)) {
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("aggregate")) {
            saw_aggregate = true;
            CHECK(j["replicates"] == 3);
            CHECK(j["alpha_levels"] == nlohmann::json::parse("[0.05]"));
        } else {
            CHECK(j["replicate"] == records);
            CHECK(j.contains("nu2"));
            CHECK(j["xi"].size() == 1);
            ++records;
        }
    }
    CHECK(records == 3);
    CHECK(saw_aggregate);

    // identical bytes on a rerun
    const fs::path out2 = temp_file("simulate_out2.jsonl");
    config.output = out2.string();
    CHECK(blocktau::cmd_simulate(config) == blocktau::kExitOk);
    CHECK(read_file(out) == read_file(out2));

    // zero replicates: success with empty output
    Scenario none = s;
    none.replicates = 0;
    write_file(scenario_file, blocktau::scenario_to_json(none).dump());
    config.output = out.string();
    CHECK(blocktau::cmd_simulate(config) == blocktau::kExitOk);
    CHECK(read_file(out).empty());

    // failure modes
    blocktau::SimulateConfig bad;
    CHECK(blocktau::cmd_simulate(bad) == blocktau::kExitParse);
    bad.scenario_file = temp_file("bad_scenario.json").string();
    write_file(bad.scenario_file, "{not json");
    CHECK(blocktau::cmd_simulate(bad) == blocktau::kExitParse);
    write_file(bad.scenario_file, "{\"n\": 5}");
    CHECK(blocktau::cmd_simulate(bad) == blocktau::kExitParse);
    blocktau::SimulateConfig unknown;
    unknown.preset = "nope";
    CHECK(blocktau::cmd_simulate(unknown) == blocktau::kExitParse);
}

TEST_CASE("transform command") {
    const fs::path matrix_file = temp_file("transform_tau.csv");
    const fs::path partition_file = temp_file("transform_partition.json");
    const fs::path out = temp_file("transform_out.json");

    write_file(matrix_file,
               "1,0.4,0.1,0.1\n0.4,1,0.1,0.1\n0.1,0.1,1,0.4\n0.1,0.1,0.4,1\n");
    write_file(partition_file, "[[1,2],[3,4]]");

    blocktau::TransformConfig config;
    config.input = matrix_file.string();
    config.partition_file = partition_file.string();
    config.output = out.string();
    CHECK(blocktau::cmd_transform(config) == blocktau::kExitOk);

    nlohmann::json report = nlohmann::json::parse(read_file(out));
    CHECK(report["schema_version"] == 1);
    CHECK(report["metadata"]["command"] == "transform");
    Eigen::MatrixXd rho = blocktau::matrix_from_json(report["linear_correlation"]);
    CHECK(rho(0, 1) == doctest::Approx(std::sin(0.4 * std::numbers::pi / 2.0))
                           .epsilon(1e-14));
    Eigen::MatrixXd omega = blocktau::matrix_from_json(report["precision"]);
    Eigen::MatrixXd product = omega * rho;
    CHECK(product.isApprox(Eigen::MatrixXd::Identity(4, 4), 1e-10));

    // partition/matrix size mismatch
    write_file(partition_file, "[[1,2],[3]]");
    CHECK(blocktau::cmd_transform(config) == blocktau::kExitParse);
    write_file(partition_file, "[[1,2],[3,4]]");

    // non-correlation input
    write_file(matrix_file, "1,0.4\n0.5,1\n");
    CHECK(blocktau::cmd_transform(config) == blocktau::kExitParse);

    // singular matrix: exit 4 plainly, success with the shrink option
    write_file(matrix_file, "1,1\n1,1\n");
    write_file(partition_file, "[[1,2]]");
    CHECK(blocktau::cmd_transform(config) == blocktau::kExitSingular);
    config.shrink_correlation = true;
    CHECK(blocktau::cmd_transform(config) == blocktau::kExitOk);
}
