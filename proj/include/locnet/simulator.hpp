#pragma once
#include <locnet/network.hpp>
#include <locnet/solvers.hpp>
#include <locnet/types.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace locnet {

/// Noisy ranges |true distance + N(0, sigma^2)|, one draw per undirected
/// edge followed by one per anchor link, in topology order.
Problem gen_measurements(const Topology& topology, double sigma, std::uint64_t seed);

/// Per-sensor root mean squared error over Monte Carlo estimates.
double rmse(std::span<const Positions> estimates, const Positions& truth);

/// Squared error of one estimate divided by the sensor count; the mean of
/// these over trials is the squared RMSE.
double rmse_contribution(const Positions& estimate, const Positions& truth);

enum class SolverKind
{
    parallel,
    async_exact,
    async_inexact,
};

const char* to_string(SolverKind kind) noexcept;
SolverKind parse_solver_kind(const std::string& name);

struct SolverSpec
{
    SolverKind kind = SolverKind::parallel;
    SolverOptions options;
    /// Non-uniform activation for async-exact; uniform when empty.
    std::vector<double> activation_probabilities;
};

/// Runs one solver. The activation stream of async-exact is derived from
/// opts.seed.
SolverTrace run_solver(const Problem& problem, const SolverSpec& spec);

struct ExperimentConfig
{
    Topology network;
    std::vector<double> noise_sigmas;
    int trials = 1;
    std::vector<SolverSpec> solvers;
    std::uint64_t seed = 0;
    /// Worker threads; 0 means LOCNET_WORKERS or the hardware default.
    int workers = 0;
};

void check_config(const ExperimentConfig& config);

struct TrialRecord
{
    std::size_t solver = 0;
    std::size_t sigma_index = 0;
    int trial = 0;
    bool failed = false;
    std::string error;
    double rmse_contrib = 0;
    double fhat_final = 0;
    double f_final = 0;
    double tight_bound = 0;
    double apriori_bound = 0;
    double broadcasts = 0; // mean per sensor
    std::int64_t iterations = 0;
    Termination termination = Termination::budget_exhausted;
    double wall_seconds = 0;
};

struct Aggregate
{
    std::size_t solver = 0;
    std::size_t sigma_index = 0;
    double sigma = 0;
    int completed = 0;
    int failed = 0;
    double rmse = 0;
    double mean_fhat = 0;
    double mean_f = 0;
    double mean_tight_bound = 0;
    double mean_apriori_bound = 0;
    double mean_broadcasts = 0;
    double wall_seconds = 0;
};

struct ExperimentResult
{
    /// Ordered by (sigma index, trial, solver).
    std::vector<TrialRecord> trials;
    /// Ordered by (solver, sigma index).
    std::vector<Aggregate> aggregates;
};

/// Seed of the measurement draw for (sigma index, trial).
std::uint64_t measurement_seed(std::uint64_t master, std::size_t sigma_index, int trial);
/// Seed handed to a solver for (sigma index, trial, solver index).
std::uint64_t solver_seed(std::uint64_t master, std::size_t sigma_index, int trial, std::size_t solver);

/// Aggregates over the completed trials in `trials`.
std::vector<Aggregate> aggregate(const ExperimentConfig& config, std::span<const TrialRecord> trials);

/// Worker count from LOCNET_WORKERS, else the hardware concurrency.
int default_workers();

/// Monte Carlo sweep. Output does not depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace locnet
