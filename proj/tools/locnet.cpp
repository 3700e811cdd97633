// locnet: generate networks, run the distributed solvers, sweep Monte Carlo
// experiments and certify optimality gaps.
//
// Exit codes: 0 success, 2 usage, 3 validation, 4 iteration budget
// exhausted, 5 internal.

#include <locnet/cost.hpp>
#include <locnet/io.hpp>
#include <locnet/network.hpp>
#include <locnet/seed.hpp>
#include <locnet/simulator.hpp>
#include <locnet/solvers.hpp>
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace locnet;

enum ExitCode : int
{
    exit_ok = 0,
    exit_usage = 2,
    exit_validation = 3,
    exit_budget = 4,
    exit_internal = 5,
};

int exit_code_for(const Error& e)
{
    switch (e.kind()) {
        case ErrorKind::invalid_argument:
        case ErrorKind::io:
            return exit_usage;
        case ErrorKind::disconnected_graph:
        case ErrorKind::no_anchor_link:
        case ErrorKind::malformed_measurement:
        case ErrorKind::generation_failure:
            return exit_validation;
        case ErrorKind::numerical_divergence:
            return exit_internal;
    }
    return exit_internal;
}

struct GenerateArgs
{
    Index n = 10;
    Index p = 2;
    std::optional<double> radius;
    std::optional<double> target_degree;
    bool anchors_corners = true;
    std::uint64_t seed = 0;
    double sigma = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& a)
{
    GeometricOptions opts;
    opts.n = a.n;
    opts.p = a.p;
    opts.anchors_at_corners = a.anchors_corners;
    opts.seed = a.seed;
    Topology topo;
    if (a.radius) {
        opts.connect_radius = *a.radius;
        topo = generate_geometric(opts);
    } else {
        topo = generate_with_average_degree(opts, *a.target_degree);
    }
    const Problem problem = gen_measurements(topo, a.sigma, derive_seed(a.seed, {stream::noise}));
    validate(problem);
    write_json_file(a.out, problem_to_json(problem, &topo.truth));
    std::cout << "sensors " << topo.n << " edges " << topo.edges.size() << " anchor_links "
              << topo.anchor_links.size() << " radius " << format_double(topo.radius) << " average_degree "
              << format_double(topo.average_degree()) << "\n";
    return exit_ok;
}

struct SolveArgs
{
    std::string problem;
    std::string solver = "parallel";
    std::string stop_rule = "gradient-norm";
    double epsilon_g = 1e-6;
    double epsilon_r = 1e-6;
    std::int64_t max_iterations = 100000;
    std::int64_t inner_max_iterations = 200;
    double slice_edge_weight = block_edge_weight;
    std::uint64_t seed = 0;
    std::string init;
    std::string trace;
    std::string estimate;
};

int cmd_solve(const SolveArgs& a)
{
    const ProblemFile file = problem_from_json(read_json_file(a.problem));
    SolverSpec spec;
    spec.kind = parse_solver_kind(a.solver);
    auto& o = spec.options;
    o.stop_rule = parse_stop_rule(a.stop_rule);
    o.epsilon_g = a.epsilon_g;
    o.epsilon_r = a.epsilon_r;
    o.max_iterations = a.max_iterations;
    o.inner_max_iterations = a.inner_max_iterations;
    o.slice_edge_weight = a.slice_edge_weight;
    o.seed = a.seed;
    if (!a.init.empty()) {
        const json j = read_json_file(a.init);
        o.init_rule = InitRule::given;
        o.initial = positions_from_json(j.at("positions"), file.problem.p());
    }
    const SolverTrace trace = run_solver(file.problem, spec);

    if (!a.trace.empty()) {
        std::ostringstream os;
        write_trace_csv(os, trace);
        write_text_file(a.trace, os.str());
    }
    if (!a.estimate.empty()) {
        json j;
        j["positions"] = positions_to_json(trace.estimate);
        write_json_file(a.estimate, j);
    }
    const auto& last = trace.records.empty() ? trace.initial : trace.records.back();
    std::cout << "solver " << a.solver << " termination " << to_string(trace.termination) << " iterations "
              << last.k << " fhat " << format_double(last.fhat) << " grad_norm " << format_double(last.grad_norm)
              << " broadcasts_per_sensor " << format_double(last.broadcasts_per_sensor) << "\n";
    return trace.termination == Termination::budget_exhausted ? exit_budget : exit_ok;
}

int cmd_experiment(const std::string& scenario_path, int workers)
{
    const json j = read_json_file(scenario_path);
    const auto base = std::filesystem::path(scenario_path).parent_path().string();
    Scenario s = parse_scenario(j, base);
    if (workers > 0) s.config.workers = workers;
    const ExperimentResult result = run_experiment(s.config);

    std::ostringstream csv;
    write_experiment_csv(csv, s.config, result);
    write_text_file(s.csv_path, csv.str());
    write_json_file(s.summary_path, experiment_summary(s.config, result, s.include_timing));

    std::size_t failed = 0;
    for (const auto& t : result.trials) {
        if (t.failed) {
            ++failed;
            std::cerr << "trial failed: solver " << to_string(s.config.solvers[t.solver].kind) << " sigma "
                      << format_double(s.config.noise_sigmas[t.sigma_index]) << " trial " << t.trial << ": "
                      << t.error << "\n";
        }
    }
    for (const auto& a : result.aggregates) {
        std::cout << to_string(s.config.solvers[a.solver].kind) << " sigma " << format_double(a.sigma) << " rmse "
                  << format_double(a.rmse) << " mean_fhat " << format_double(a.mean_fhat) << " mean_broadcasts "
                  << format_double(a.mean_broadcasts) << " completed " << a.completed << " failed " << a.failed
                  << " wall_seconds " << a.wall_seconds << "\n";
    }
    return failed == result.trials.size() ? exit_internal : exit_ok;
}

int cmd_gap(const std::string& problem_path, const std::string& estimate_path, std::optional<double> fhat,
            const std::string& out)
{
    const ProblemFile file = problem_from_json(read_json_file(problem_path));
    const json est = read_json_file(estimate_path);
    if (!est.is_object() || !est.contains("positions")) {
        throw Error(ErrorKind::invalid_argument, "estimate file needs a 'positions' array");
    }
    const Positions x = positions_from_json(est["positions"], file.problem.p());
    const double fhat_star = fhat ? *fhat : fhat_value(file.problem, x);
    const GapCertificate cert = gap_certificate(file.problem, x, fhat_star);
    write_json_file(out, certificate_to_json(cert));
    std::cout << "fhat_star " << format_double(cert.fhat_star) << " tight_bound " << format_double(cert.tight_bound)
              << " apriori_bound " << format_double(cert.apriori_bound) << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Distributed sensor network localization by disk relaxation"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Random geometric network in the unit square/cube");
    generate->add_option("--n", gen.n, "Number of sensors")->required()->check(CLI::PositiveNumber);
    generate->add_option("--dim", gen.p, "Dimension (1, 2 or 3)")->check(CLI::Range(1, 3));
    auto* radius_opt = generate->add_option("--radius", gen.radius, "Connectivity radius");
    auto* degree_opt = generate->add_option("--target-avg-degree", gen.target_degree, "Target average node degree");
    radius_opt->excludes(degree_opt);
    generate->add_flag("--anchors-corners,!--no-anchors-corners", gen.anchors_corners,
                       "Anchors at the corners of the unit box (default) or p+1 random anchors");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--sigma", gen.sigma, "Measurement noise standard deviation")->check(CLI::NonNegativeNumber);
    generate->add_option("--out", gen.out, "Output problem JSON")->required();

    SolveArgs sol;
    auto* solve = app.add_subcommand("solve", "Minimize the relaxed cost with one solver");
    solve->add_option("--problem", sol.problem, "Problem JSON")->required();
    solve->add_option("--solver", sol.solver, "parallel | async-exact | async-inexact")
        ->check(CLI::IsMember({"parallel", "async-exact", "async-inexact"}));
    solve->add_option("--stop-rule", sol.stop_rule, "gradient-norm | relative-improvement | fixed-iterations")
        ->check(CLI::IsMember({"gradient-norm", "relative-improvement", "fixed-iterations"}));
    solve->add_option("--epsilon-g", sol.epsilon_g, "Gradient-norm tolerance");
    solve->add_option("--epsilon-r", sol.epsilon_r, "Relative-improvement tolerance");
    solve->add_option("--max-iterations", sol.max_iterations, "Iteration budget");
    solve->add_option("--inner-max-iterations", sol.inner_max_iterations, "Inner iteration budget (async-exact)");
    solve->add_option("--slice-edge-weight", sol.slice_edge_weight, "Edge weight of the per-node problem (async-exact)");
    solve->add_option("--seed", sol.seed, "Random seed");
    solve->add_option("--init", sol.init, "Initial positions JSON ({\"positions\": [...]})");
    solve->add_option("--trace", sol.trace, "Output trace CSV");
    solve->add_option("--estimate", sol.estimate, "Output estimate JSON");

    std::string scenario;
    int workers = 0;
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo sweep described by a scenario file");
    experiment->add_option("--scenario", scenario, "Scenario JSON")->required();
    experiment->add_option("--workers", workers, "Worker threads (overrides LOCNET_WORKERS)")->check(CLI::NonNegativeNumber);

    std::string gap_problem, gap_estimate, gap_out;
    std::optional<double> gap_fhat;
    auto* gap = app.add_subcommand("gap", "Optimality-gap certificate for an estimate");
    gap->add_option("--problem", gap_problem, "Problem JSON")->required();
    gap->add_option("--estimate", gap_estimate, "Estimate JSON")->required();
    gap->add_option("--fhat", gap_fhat, "Relaxed optimum value (default: relaxed cost at the estimate)");
    gap->add_option("--out", gap_out, "Output certificate JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*generate) {
            if (!gen.radius && !gen.target_degree) {
                std::cerr << "generate: one of --radius or --target-avg-degree is required\n";
                return exit_usage;
            }
            return cmd_generate(gen);
        }
        if (*solve) return cmd_solve(sol);
        if (*experiment) return cmd_experiment(scenario, workers);
        if (*gap) return cmd_gap(gap_problem, gap_estimate, gap_fhat, gap_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_internal;
}
