#include <locnet/io.hpp>
#include <locnet/seed.hpp>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace locnet {
namespace {

[[noreturn]] void bad_document(const std::string& what)
{
    throw Error(ErrorKind::invalid_argument, what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) bad_document(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (!allowed.contains(item.key())) bad_document("unknown field '" + item.key() + "' in " + where);
    }
}

const json& require(const json& j, const char* key, const std::string& where)
{
    const auto it = j.find(key);
    if (it == j.end()) bad_document("missing field '" + std::string(key) + "' in " + where);
    return *it;
}

template <class T>
T get_as(const json& j, const std::string& what)
{
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        bad_document(what + " has the wrong type");
    }
}

Point point_from_json(const json& j, Index p, const std::string& what)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != p) {
        bad_document(what + " must be an array of " + std::to_string(p) + " numbers");
    }
    Point x(p);
    for (Index d = 0; d < p; ++d) x(d) = get_as<double>(j[static_cast<std::size_t>(d)], what);
    return x;
}

std::string resolve(const std::string& path, const std::string& base_dir)
{
    const std::filesystem::path fp(path);
    if (fp.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / fp).string();
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json positions_to_json(const Positions& x)
{
    json arr = json::array();
    for (Index i = 0; i < x.cols(); ++i) {
        json pt = json::array();
        for (Index d = 0; d < x.rows(); ++d) pt.push_back(x(d, i));
        arr.push_back(std::move(pt));
    }
    return arr;
}

Positions positions_from_json(const json& j, Index p)
{
    if (!j.is_array()) bad_document("positions must be an array of points");
    Positions x(p, static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        x.col(static_cast<Index>(i)) = point_from_json(j[i], p, "position " + std::to_string(i));
    }
    return x;
}

json problem_to_json(const Problem& problem, const Positions* truth)
{
    json j;
    j["n"] = problem.n();
    j["p"] = problem.p();
    json edges = json::array();
    for (const auto& e : problem.edges()) edges.push_back({e.i, e.j});
    j["edges"] = std::move(edges);
    j["edge_measurements"] = problem.edge_measurements();
    j["anchors"] = positions_to_json(problem.anchors());
    json links = json::array();
    for (const auto& l : problem.anchor_links()) links.push_back({l.sensor, l.anchor, l.range});
    j["anchor_links"] = std::move(links);
    if (truth) j["truth"] = positions_to_json(*truth);
    return j;
}

ProblemFile problem_from_json(const json& j)
{
    const std::string where = "problem document";
    reject_unknown_keys(j, {"n", "p", "edges", "edge_measurements", "anchors", "anchor_links", "truth"}, where);
    const Index n = get_as<Index>(require(j, "n", where), "n");
    const Index p = get_as<Index>(require(j, "p", where), "p");
    if (p < 1 || p > max_dim) bad_document("p must be 1, 2 or 3");

    std::vector<Edge> edges;
    for (const auto& e : require(j, "edges", where)) {
        if (!e.is_array() || e.size() != 2) bad_document("each edge must be [i, j]");
        edges.push_back({get_as<Index>(e[0], "edge index"), get_as<Index>(e[1], "edge index")});
    }
    const auto d = get_as<std::vector<double>>(require(j, "edge_measurements", where), "edge_measurements");
    const Positions anchors = positions_from_json(require(j, "anchors", where), p);
    std::vector<AnchorLink> links;
    for (const auto& l : require(j, "anchor_links", where)) {
        if (!l.is_array() || l.size() != 3) bad_document("each anchor link must be [sensor, anchor, range]");
        links.push_back({get_as<Index>(l[0], "anchor link sensor"), get_as<Index>(l[1], "anchor link anchor"),
                         get_as<double>(l[2], "anchor link range")});
    }
    std::optional<Positions> truth;
    if (const auto it = j.find("truth"); it != j.end() && !it->is_null()) {
        truth = positions_from_json(*it, p);
        if (truth->cols() != n) bad_document("truth must hold one position per sensor");
    }
    return ProblemFile{Problem(n, p, std::move(edges), d, anchors, std::move(links)), std::move(truth)};
}

Topology topology_of(const ProblemFile& file)
{
    if (!file.truth) throw Error(ErrorKind::invalid_argument, "problem file has no ground truth");
    Topology t;
    t.n = file.problem.n();
    t.p = file.problem.p();
    t.edges = file.problem.edges();
    t.anchors = file.problem.anchors();
    for (const auto& l : file.problem.anchor_links()) t.anchor_links.emplace_back(l.sensor, l.anchor);
    t.truth = *file.truth;
    return t;
}

json certificate_to_json(const GapCertificate& cert)
{
    json j;
    j["fhat_star"] = cert.fhat_star;
    j["tight_bound"] = cert.tight_bound;
    j["apriori_bound"] = cert.apriori_bound;
    json edges = json::array();
    for (const auto& e : cert.slack_edges) edges.push_back({e.i, e.j});
    j["slack_edges"] = std::move(edges);
    json links = json::array();
    for (const auto& [i, k] : cert.slack_anchor_links) links.push_back({i, k});
    j["slack_anchor_links"] = std::move(links);
    return j;
}

void write_trace_csv(std::ostream& os, const SolverTrace& trace)
{
    os << "k,fhat,grad_norm,broadcasts_per_sensor\n";
    for (const auto& r : trace.records) {
        os << r.k << ',' << format_double(r.fhat) << ',' << format_double(r.grad_norm) << ','
           << format_double(r.broadcasts_per_sensor) << '\n';
    }
}

void write_experiment_csv(std::ostream& os, const ExperimentConfig& config, const ExperimentResult& result)
{
    os << "solver,sigma,trial,rmse_contrib,fhat_final,f_final,tight_bound,apriori_bound,broadcasts\n";
    for (const auto& t : result.trials) {
        if (t.failed) continue;
        os << to_string(config.solvers[t.solver].kind) << ',' << format_double(config.noise_sigmas[t.sigma_index])
           << ',' << t.trial << ',' << format_double(t.rmse_contrib) << ',' << format_double(t.fhat_final) << ','
           << format_double(t.f_final) << ',' << format_double(t.tight_bound) << ','
           << format_double(t.apriori_bound) << ',' << format_double(t.broadcasts) << '\n';
    }
}

json experiment_summary(const ExperimentConfig& config, const ExperimentResult& result, bool include_timing)
{
    json j;
    j["seed"] = config.seed;
    j["trials"] = config.trials;
    j["noise_sigmas"] = config.noise_sigmas;
    j["n"] = config.network.n;
    j["average_degree"] = config.network.average_degree();
    json rows = json::array();
    for (const auto& a : result.aggregates) {
        json r;
        r["solver"] = to_string(config.solvers[a.solver].kind);
        r["solver_index"] = a.solver;
        r["sigma"] = a.sigma;
        r["completed"] = a.completed;
        r["failed"] = a.failed;
        // NaN aggregates (all trials failed) serialize as null.
        r["rmse"] = a.rmse;
        r["mean_fhat"] = a.mean_fhat;
        r["mean_f"] = a.mean_f;
        r["mean_tight_bound"] = a.mean_tight_bound;
        r["mean_apriori_bound"] = a.mean_apriori_bound;
        r["mean_broadcasts"] = a.mean_broadcasts;
        if (include_timing) r["wall_seconds"] = a.wall_seconds;
        rows.push_back(std::move(r));
    }
    j["results"] = std::move(rows);
    json failures = json::array();
    for (const auto& t : result.trials) {
        if (!t.failed) continue;
        failures.push_back({{"solver", to_string(config.solvers[t.solver].kind)},
                            {"sigma", config.noise_sigmas[t.sigma_index]},
                            {"trial", t.trial},
                            {"error", t.error}});
    }
    j["failed_trials"] = std::move(failures);
    return j;
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::invalid_argument, "'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
    out << contents;
    if (!out) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

namespace {

SolverSpec parse_solver(const json& j, std::size_t index)
{
    const std::string where = "solvers[" + std::to_string(index) + "]";
    reject_unknown_keys(j,
        {"solver", "stop_rule", "epsilon_g", "epsilon_r", "max_iterations", "inner_max_iterations",
         "inner_epsilon_g", "inner_warm_start", "slice_edge_weight", "proximal_weight",
         "activation_probabilities"},
        where);
    SolverSpec spec;
    spec.kind = parse_solver_kind(get_as<std::string>(require(j, "solver", where), "solver"));
    auto& o = spec.options;
    if (j.contains("stop_rule")) o.stop_rule = parse_stop_rule(get_as<std::string>(j["stop_rule"], "stop_rule"));
    if (j.contains("epsilon_g")) o.epsilon_g = get_as<double>(j["epsilon_g"], "epsilon_g");
    if (j.contains("epsilon_r")) o.epsilon_r = get_as<double>(j["epsilon_r"], "epsilon_r");
    if (j.contains("max_iterations")) o.max_iterations = get_as<std::int64_t>(j["max_iterations"], "max_iterations");
    if (j.contains("inner_max_iterations")) {
        o.inner_max_iterations = get_as<std::int64_t>(j["inner_max_iterations"], "inner_max_iterations");
    }
    if (j.contains("inner_epsilon_g")) o.inner_epsilon_g = get_as<double>(j["inner_epsilon_g"], "inner_epsilon_g");
    if (j.contains("inner_warm_start")) o.inner_warm_start = get_as<bool>(j["inner_warm_start"], "inner_warm_start");
    if (j.contains("slice_edge_weight")) o.slice_edge_weight = get_as<double>(j["slice_edge_weight"], "slice_edge_weight");
    if (j.contains("proximal_weight")) o.proximal_weight = get_as<double>(j["proximal_weight"], "proximal_weight");
    if (j.contains("activation_probabilities")) {
        if (spec.kind != SolverKind::async_exact) bad_document(where + ": activation_probabilities apply to async-exact only");
        spec.activation_probabilities = get_as<std::vector<double>>(j["activation_probabilities"], "activation_probabilities");
    }
    check_options(o);
    return spec;
}

Topology parse_network(const json& j, const std::string& base_dir)
{
    reject_unknown_keys(j, {"file", "generate"}, "network");
    if (j.contains("file") == j.contains("generate")) bad_document("network needs exactly one of 'file' or 'generate'");
    if (j.contains("file")) {
        const auto path = resolve(get_as<std::string>(j["file"], "network.file"), base_dir);
        return topology_of(problem_from_json(read_json_file(path)));
    }
    const json& g = j["generate"];
    reject_unknown_keys(g, {"n", "p", "radius", "target_avg_degree", "anchors_corners", "seed"}, "network.generate");
    GeometricOptions opts;
    opts.n = get_as<Index>(require(g, "n", "network.generate"), "n");
    if (g.contains("p")) opts.p = get_as<Index>(g["p"], "p");
    if (g.contains("anchors_corners")) opts.anchors_at_corners = get_as<bool>(g["anchors_corners"], "anchors_corners");
    if (g.contains("seed")) opts.seed = get_as<std::uint64_t>(g["seed"], "seed");
    if (g.contains("radius") == g.contains("target_avg_degree")) {
        bad_document("network.generate needs exactly one of 'radius' or 'target_avg_degree'");
    }
    if (g.contains("radius")) {
        opts.connect_radius = get_as<double>(g["radius"], "radius");
        return generate_geometric(opts);
    }
    return generate_with_average_degree(opts, get_as<double>(g["target_avg_degree"], "target_avg_degree"));
}

} // namespace

Scenario parse_scenario(const json& j, const std::string& base_dir)
{
    const std::string where = "scenario";
    reject_unknown_keys(j, {"network", "noise_sigmas", "trials", "seed", "solvers", "output", "workers", "timing"}, where);
    Scenario s;
    s.config.network = parse_network(require(j, "network", where), base_dir);
    s.config.noise_sigmas = get_as<std::vector<double>>(require(j, "noise_sigmas", where), "noise_sigmas");
    s.config.trials = get_as<int>(require(j, "trials", where), "trials");
    if (j.contains("seed")) s.config.seed = get_as<std::uint64_t>(j["seed"], "seed");
    if (j.contains("workers")) s.config.workers = get_as<int>(j["workers"], "workers");
    if (j.contains("timing")) s.include_timing = get_as<bool>(j["timing"], "timing");
    const json& solvers = require(j, "solvers", where);
    if (!solvers.is_array() || solvers.empty()) bad_document("solvers must be a nonempty array");
    for (std::size_t k = 0; k < solvers.size(); ++k) s.config.solvers.push_back(parse_solver(solvers[k], k));
    const json& out = require(j, "output", where);
    reject_unknown_keys(out, {"csv", "summary"}, "output");
    s.csv_path = resolve(get_as<std::string>(require(out, "csv", "output"), "output.csv"), base_dir);
    s.summary_path = resolve(get_as<std::string>(require(out, "summary", "output"), "output.summary"), base_dir);
    check_config(s.config);
    return s;
}

} // namespace locnet
