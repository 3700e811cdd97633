#include <locnet/simulator.hpp>
#include <locnet/cost.hpp>
#include <locnet/seed.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace locnet {

Problem gen_measurements(const Topology& topology, double sigma, std::uint64_t seed)
{
    if (!(sigma >= 0) || !std::isfinite(sigma)) throw Error(ErrorKind::invalid_argument, "sigma must be finite and nonnegative");
    if (topology.truth.rows() != topology.p || topology.truth.cols() != topology.n) {
        throw Error(ErrorKind::invalid_argument, "topology truth does not match its shape");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto draw = [&](double distance) { return sigma > 0 ? std::abs(distance + sigma * noise(rng)) : distance; };

    std::vector<double> d;
    d.reserve(topology.edges.size());
    for (const auto& e : topology.edges) {
        if (e.i < 0 || e.j < 0 || e.i >= topology.n || e.j >= topology.n) {
            throw Error(ErrorKind::invalid_argument, "topology edge out of range");
        }
        d.push_back(draw((topology.truth.col(e.i) - topology.truth.col(e.j)).norm()));
    }
    std::vector<AnchorLink> links;
    links.reserve(topology.anchor_links.size());
    for (const auto& [i, k] : topology.anchor_links) {
        if (i < 0 || i >= topology.n || k < 0 || k >= topology.anchors.cols()) {
            throw Error(ErrorKind::invalid_argument, "topology anchor link out of range");
        }
        links.push_back({i, k, draw((topology.truth.col(i) - topology.anchors.col(k)).norm())});
    }
    return Problem(topology.n, topology.p, topology.edges, std::move(d), topology.anchors, std::move(links));
}

double rmse_contribution(const Positions& estimate, const Positions& truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw Error(ErrorKind::invalid_argument, "estimate does not match truth shape");
    }
    return (truth - estimate).squaredNorm() / static_cast<double>(truth.cols());
}

double rmse(std::span<const Positions> estimates, const Positions& truth)
{
    if (estimates.empty()) throw Error(ErrorKind::invalid_argument, "rmse needs at least one estimate");
    if (truth.cols() == 0) throw Error(ErrorKind::invalid_argument, "rmse needs at least one sensor");
    double total = 0;
    for (const auto& est : estimates) {
        if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
            throw Error(ErrorKind::invalid_argument, "estimate does not match truth shape");
        }
        total += (truth - est).squaredNorm();
    }
    return std::sqrt(total / static_cast<double>(truth.cols()) / static_cast<double>(estimates.size()));
}

const char* to_string(SolverKind kind) noexcept
{
    switch (kind) {
        case SolverKind::parallel: return "parallel";
        case SolverKind::async_exact: return "async-exact";
        case SolverKind::async_inexact: return "async-inexact";
    }
    return "unknown";
}

SolverKind parse_solver_kind(const std::string& name)
{
    if (name == "parallel") return SolverKind::parallel;
    if (name == "async-exact") return SolverKind::async_exact;
    if (name == "async-inexact") return SolverKind::async_inexact;
    throw Error(ErrorKind::invalid_argument, "unknown solver '" + name + "'");
}

SolverTrace run_solver(const Problem& problem, const SolverSpec& spec)
{
    switch (spec.kind) {
        case SolverKind::parallel:
            return solve_parallel(problem, spec.options);
        case SolverKind::async_exact: {
            const auto seed = derive_seed(spec.options.seed, {stream::activation});
            if (spec.activation_probabilities.empty()) {
                return solve_async_exact(problem, ActivationSequence(problem.n(), seed), spec.options);
            }
            return solve_async_exact(problem, ActivationSequence(spec.activation_probabilities, seed), spec.options);
        }
        case SolverKind::async_inexact:
            return solve_async_inexact(problem, spec.options);
    }
    throw Error(ErrorKind::invalid_argument, "unknown solver kind");
}

void check_config(const ExperimentConfig& config)
{
    if (config.trials < 1) throw Error(ErrorKind::invalid_argument, "trials must be at least 1");
    if (config.noise_sigmas.empty()) throw Error(ErrorKind::invalid_argument, "at least one noise level is required");
    for (double s : config.noise_sigmas) {
        if (!(s >= 0) || !std::isfinite(s)) throw Error(ErrorKind::invalid_argument, "noise levels must be nonnegative");
    }
    if (config.solvers.empty()) throw Error(ErrorKind::invalid_argument, "at least one solver is required");
    for (const auto& s : config.solvers) check_options(s.options);
    if (!satisfies_assumption(config.network)) {
        throw Error(ErrorKind::disconnected_graph, "experiment network is disconnected or has no anchor link");
    }
}

std::uint64_t measurement_seed(std::uint64_t master, std::size_t sigma_index, int trial)
{
    return derive_seed(master, {stream::noise, sigma_index, static_cast<std::uint64_t>(trial)});
}

std::uint64_t solver_seed(std::uint64_t master, std::size_t sigma_index, int trial, std::size_t solver)
{
    return derive_seed(master, {stream::init, sigma_index, static_cast<std::uint64_t>(trial), solver});
}

std::vector<Aggregate> aggregate(const ExperimentConfig& config, std::span<const TrialRecord> trials)
{
    std::vector<Aggregate> out;
    for (std::size_t s = 0; s < config.solvers.size(); ++s) {
        for (std::size_t si = 0; si < config.noise_sigmas.size(); ++si) {
            Aggregate a;
            a.solver = s;
            a.sigma_index = si;
            a.sigma = config.noise_sigmas[si];
            double sq = 0;
            for (const auto& t : trials) {
                if (t.solver != s || t.sigma_index != si) continue;
                a.wall_seconds += t.wall_seconds;
                if (t.failed) {
                    ++a.failed;
                    continue;
                }
                ++a.completed;
                sq += t.rmse_contrib;
                a.mean_fhat += t.fhat_final;
                a.mean_f += t.f_final;
                a.mean_tight_bound += t.tight_bound;
                a.mean_apriori_bound += t.apriori_bound;
                a.mean_broadcasts += t.broadcasts;
            }
            if (a.completed > 0) {
                const double m = a.completed;
                a.rmse = std::sqrt(sq / m);
                a.mean_fhat /= m;
                a.mean_f /= m;
                a.mean_tight_bound /= m;
                a.mean_apriori_bound /= m;
                a.mean_broadcasts /= m;
            } else {
                a.rmse = a.mean_fhat = a.mean_f = a.mean_tight_bound = a.mean_apriori_bound = a.mean_broadcasts =
                    std::nan("");
            }
            out.push_back(a);
        }
    }
    return out;
}

int default_workers()
{
    if (const char* env = std::getenv("LOCNET_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

std::vector<TrialRecord> run_task(const ExperimentConfig& config, std::size_t sigma_index, int trial)
{
    std::vector<TrialRecord> out;
    out.reserve(config.solvers.size());
    const Problem problem = gen_measurements(
        config.network, config.noise_sigmas[sigma_index], measurement_seed(config.seed, sigma_index, trial));
    for (std::size_t s = 0; s < config.solvers.size(); ++s) {
        TrialRecord rec;
        rec.solver = s;
        rec.sigma_index = sigma_index;
        rec.trial = trial;
        SolverSpec spec = config.solvers[s];
        spec.options.seed = solver_seed(config.seed, sigma_index, trial, s);
        spec.options.keep_trace = false;
        spec.options.record_iterates = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            const SolverTrace trace = run_solver(problem, spec);
            rec.rmse_contrib = rmse_contribution(trace.estimate, config.network.truth);
            rec.fhat_final = trace.final_fhat();
            rec.f_final = eval_f(problem, trace.estimate);
            const GapCertificate cert = gap_certificate(problem, trace.estimate, rec.fhat_final);
            rec.tight_bound = cert.tight_bound;
            rec.apriori_bound = cert.apriori_bound;
            rec.broadcasts = trace.records.empty() ? 0.0 : trace.records.back().broadcasts_per_sensor;
            rec.iterations = trace.records.empty() ? 0 : trace.records.back().k;
            rec.termination = trace.termination;
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    check_config(config);
    const std::size_t num_sigmas = config.noise_sigmas.size();
    const std::size_t num_tasks = num_sigmas * static_cast<std::size_t>(config.trials);
    std::vector<std::vector<TrialRecord>> slots(num_tasks);

    const int workers = std::max(1, std::min<int>(config.workers > 0 ? config.workers : default_workers(),
                                                  static_cast<int>(num_tasks)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < num_tasks; t = next++) {
            const std::size_t si = t / static_cast<std::size_t>(config.trials);
            const int trial = static_cast<int>(t % static_cast<std::size_t>(config.trials));
            slots[t] = run_task(config, si, trial);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    ExperimentResult result;
    result.trials.reserve(num_tasks * config.solvers.size());
    for (auto& slot : slots) {
        for (auto& rec : slot) result.trials.push_back(std::move(rec));
    }
    result.aggregates = aggregate(config, result.trials);
    return result;
}

} // namespace locnet
