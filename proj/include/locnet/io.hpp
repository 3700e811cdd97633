#pragma once
#include <locnet/cost.hpp>
#include <locnet/network.hpp>
#include <locnet/simulator.hpp>
#include <locnet/solvers.hpp>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>

namespace locnet {

using json = nlohmann::json;

/// Problem document plus optional ground truth. Indices are 0-based.
///   {n, p, edges:[[i,j]...], edge_measurements:[...], anchors:[[...]...],
///    anchor_links:[[sensor,anchor,r]...], truth:[[...]...]}
struct ProblemFile
{
    Problem problem;
    std::optional<Positions> truth;
};

json positions_to_json(const Positions& x);
Positions positions_from_json(const json& j, Index p);

json problem_to_json(const Problem& problem, const Positions* truth = nullptr);
ProblemFile problem_from_json(const json& j);

/// Topology (with truth) of a problem file; throws when truth is missing.
Topology topology_of(const ProblemFile& file);

json certificate_to_json(const GapCertificate& cert);

/// Columns k, fhat, grad_norm, broadcasts_per_sensor; one row per
/// iteration k >= 1.
void write_trace_csv(std::ostream& os, const SolverTrace& trace);

/// Long format, one row per completed (solver, sigma, trial).
void write_experiment_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result);
json experiment_summary(const ExperimentConfig& config, const ExperimentResult& result, bool include_timing);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
void write_json_file(const std::string& path, const json& j);

/// Experiment scenario document.
///   {
///     "network": {"file": path} | {"generate": {n, p, radius | target_avg_degree,
///                                               anchors_corners, seed}},
///     "noise_sigmas": [...], "trials": M, "seed": master,
///     "solvers": [{"solver": name, "stop_rule": ..., "epsilon_g": ..., ...}],
///     "output": {"csv": path, "summary": path},
///     "workers": w (optional)
///   }
/// Unknown keys are rejected.
struct Scenario
{
    ExperimentConfig config;
    std::string csv_path;
    std::string summary_path;
    bool include_timing = false;
};

/// Relative file paths resolve against base_dir.
Scenario parse_scenario(const json& j, const std::string& base_dir);

} // namespace locnet
