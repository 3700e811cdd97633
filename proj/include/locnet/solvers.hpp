#pragma once
#include <locnet/cost.hpp>
#include <locnet/network.hpp>
#include <locnet/types.hpp>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace locnet {

enum class StopRule
{
    gradient_norm,
    relative_improvement,
    fixed_iterations,
};

enum class InitRule
{
    uniform_random,
    given,
};

enum class Termination
{
    converged,
    budget_exhausted,
    completed, // fixed-iterations mode ran its full budget
};

const char* to_string(StopRule rule) noexcept;
const char* to_string(Termination t) noexcept;
StopRule parse_stop_rule(const std::string& name);

struct SolverOptions
{
    std::int64_t max_iterations = 100000;
    StopRule stop_rule = StopRule::gradient_norm;
    double epsilon_g = 1e-6;
    double epsilon_r = 1e-6;

    // Inner single-source solver (async-exact).
    std::int64_t inner_max_iterations = 200;
    double inner_epsilon_g = 1e-9;
    /// Start the inner solver from the current x_i instead of a random point.
    bool inner_warm_start = true;
    /// Edge weight of the per-node problem. block_edge_weight minimizes the
    /// relaxed cost exactly over one block; split_edge_weight is the halved
    /// per-node decomposition.
    double slice_edge_weight = block_edge_weight;
    /// Weight mu of an optional proximal term mu/2 ||z - x_i(k-1)||^2.
    double proximal_weight = 0;

    InitRule init_rule = InitRule::uniform_random;
    std::optional<Positions> initial;
    std::uint64_t seed = 0;

    /// Keep x(k) in every trace record.
    bool record_iterates = false;
    /// When false only the final record is kept (long reference runs).
    bool keep_trace = true;
};

void check_options(const SolverOptions& opts);

struct IterationRecord
{
    std::int64_t k = 0;
    double fhat = 0;
    double grad_norm = 0;
    /// Cumulative broadcasts averaged over sensors. Integral for the
    /// parallel solver.
    double broadcasts_per_sensor = 0;
    Positions x; // empty unless record_iterates
    /// Sensor updated at this tick (asynchronous solvers), -1 otherwise.
    Index active = -1;
};

struct SolverTrace
{
    /// State at k = 0 before any update.
    IterationRecord initial;
    /// One record per iteration k = 1, 2, ...
    std::vector<IterationRecord> records;
    Positions estimate;
    std::vector<std::int64_t> broadcasts; // per sensor
    Termination termination = Termination::budget_exhausted;
    double lipschitz = 0;

    double final_fhat() const { return records.empty() ? initial.fhat : records.back().fhat; }
    std::int64_t iterations() const { return static_cast<std::int64_t>(records.size()); }
};

/// Seeded stream of active sensors with P(xi = i) = probabilities[i] > 0.
class ActivationSequence
{
public:
    /// Uniform over n sensors.
    ActivationSequence(Index n, std::uint64_t seed);
    ActivationSequence(std::vector<double> probabilities, std::uint64_t seed);

    Index next();
    Index size() const { return static_cast<Index>(probs_.size()); }
    const std::vector<double>& probabilities() const { return probs_; }
    bool uniform() const { return uniform_; }

private:
    std::vector<double> probs_;
    bool uniform_ = true;
    std::mt19937_64 rng_;
    std::uniform_int_distribution<Index> pick_uniform_;
    std::discrete_distribution<Index> pick_weighted_;
};

/// Extrapolation weight (k - 2) / (k + 1) of the accelerated method.
double nesterov_weight(std::int64_t k);

/// Initial positions per opts.init_rule.
Positions initial_positions(const Problem& problem, const SolverOptions& opts);

/// Synchronous accelerated gradient method; one broadcast per sensor per
/// iteration.
SolverTrace solve_parallel(const Problem& problem, const SolverOptions& opts);

struct InnerResult
{
    Point z;
    std::int64_t iterations = 0;
    double value = 0;
};

/// Accelerated gradient on a single-source problem with step 1/lipschitz.
/// Returns the best iterate seen, stopping once the gradient norm reaches
/// opts.inner_epsilon_g or the inner budget runs out. When prox_center is
/// given, opts.proximal_weight/2 ||z - prox_center||^2 is added.
InnerResult solve_single_source(const NodeSlice& slice, double lipschitz, const Point& start,
                                const SolverOptions& opts, const Point* prox_center = nullptr);

/// Randomized block minimization: the active sensor minimizes the relaxed
/// cost over its own position.
SolverTrace solve_async_exact(const Problem& problem, ActivationSequence activation,
                              const SolverOptions& opts);

/// Randomized block gradient step with uniform activation drawn from
/// opts.seed.
SolverTrace solve_async_inexact(const Problem& problem, const SolverOptions& opts);

} // namespace locnet
