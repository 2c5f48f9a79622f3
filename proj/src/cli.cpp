#include "blocktau/cli.hpp"

#include <fstream>
#include <iostream>
#include <ostream>

namespace blocktau {

namespace {

// Writes to the path, or to stdout when the path is empty.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw ParseError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const TieError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTies;
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSingular;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
}

SigmaMode resolve_mode(CovarianceMode mode, int p) {
    if (mode == CovarianceMode::Full) return SigmaMode::Full;
    if (mode == CovarianceMode::Diagonal) return SigmaMode::Diagonal;
    return p <= 2000 ? SigmaMode::Full : SigmaMode::Diagonal;
}

nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

}  // namespace

int cmd_fit(const FitConfig& config) {
    try {
        if (!(config.w >= 0.0 && config.w <= 1.0))
            throw ParseError("shrinkage weight must be in [0, 1]");
        if (!(config.alpha > 0.0 && config.alpha < 1.0))
            throw ParseError("alpha level must be in (0, 1)");
        DataMatrix data = read_csv(config.input, {config.delimiter, config.header});
        if (data.n() < 3 || data.d() < 2)
            throw ParseError("need at least 3 rows and 2 columns, got " +
                             std::to_string(data.n()) + "x" +
                             std::to_string(data.d()));
        data.validate();
        data.require_no_ties();

        const int d = data.d();
        const int p = d * (d - 1) / 2;
        const SigmaMode mode = resolve_mode(config.mode, p);

        const TauEstimate tau = kendall_tau(data);
        const PathResult path =
            build_path(tau, data, ShrinkageWeight(config.w), mode);
        const SelectedStructure sel = select_structure(path, config.alpha);
        const BlockTauEstimate& chosen = path.taus[path.index_for(sel.clusters)];

        nlohmann::json report{
            {"schema_version", 1},
            {"metadata",
             {{"command", "fit"},
              {"input", config.input},
              {"n", data.n()},
              {"d", d},
              {"w", config.w},
              {"alpha", config.alpha},
              {"mode", mode == SigmaMode::Full ? "full" : "diagonal"}}},
            {"tau_hat",
             {{"min", tau.tau.minCoeff()},
              {"max", tau.tau.maxCoeff()},
              {"mean", tau.tau.mean()}}},
            {"path", path_to_json(path)},
            {"selected",
             {{"clusters", sel.clusters},
              {"partition", partition_to_json(sel.partition)},
              {"alpha", path.alphas[path.index_for(sel.clusters)]},
              {"tau_blocks", std::vector<double>(
                                 chosen.per_block_values.begin(),
                                 chosen.per_block_values.end())}}}};
        if (config.emit_matrices) {
            report["tau_hat"]["matrix"] = matrix_to_json(tau.matrix());
            const Eigen::MatrixXd tilde =
                PairIndex(d).unvectorize(chosen.tau_tilde, 1.0);
            report["selected"]["tau_tilde_matrix"] = matrix_to_json(tilde);
            const CorrelationMatrix p_tilde = sine_transform({tilde});
            report["selected"]["linear_correlation"] =
                matrix_to_json(p_tilde.values);
            report["selected"]["precision"] =
                matrix_to_json(precision_matrix(p_tilde, sel.partition));
        }

        OutputTarget out(config.output);
        out.stream() << report.dump(2) << "\n";
        return kExitOk;
    } catch (...) {
        return exit_code_for_current_exception();
    }
}

int cmd_simulate(const SimulateConfig& config) {
    try {
        Scenario scenario;
        if (!config.preset.empty()) {
            scenario = preset_scenario(config.preset);
        } else if (!config.scenario_file.empty()) {
            scenario = scenario_from_json(parse_json_file(config.scenario_file));
        } else {
            throw ParseError("simulate needs a scenario file or a preset name");
        }
        const StudyResult result = run_study(scenario);
        OutputTarget out(config.output);
        for (const ReplicateRecord& rec : result.records)
            out.stream() << replicate_record_to_json(rec).dump() << "\n";
        if (!result.records.empty())
            out.stream()
                << study_aggregates_to_json(result, scenario.alpha_levels).dump()
                << "\n";
        return kExitOk;
    } catch (...) {
        return exit_code_for_current_exception();
    }
}

int cmd_transform(const TransformConfig& config) {
    try {
        const DataMatrix raw =
            read_csv(config.input, {config.delimiter, config.header});
        CorrelationMatrix tau{raw.values};
        try {
            tau.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
        const Partition g =
            partition_from_json(parse_json_file(config.partition_file));
        if (g.dim() != tau.d())
            throw ParseError("partition covers " + std::to_string(g.dim()) +
                             " variables, matrix has " + std::to_string(tau.d()));

        const CorrelationMatrix p_tilde = sine_transform(tau);
        const Eigen::MatrixXd omega =
            precision_matrix(p_tilde, g, config.shrink_correlation);

        nlohmann::json report{{"schema_version", 1},
                              {"metadata",
                               {{"command", "transform"},
                                {"input", config.input},
                                {"partition", partition_to_json(g)},
                                {"shrink_correlation", config.shrink_correlation}}},
                              {"linear_correlation", matrix_to_json(p_tilde.values)},
                              {"precision", matrix_to_json(omega)}};
        OutputTarget out(config.output);
        out.stream() << report.dump(2) << "\n";
        return kExitOk;
    } catch (...) {
        return exit_code_for_current_exception();
    }
}

}  // namespace blocktau
