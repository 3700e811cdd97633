#include <locnet/network.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <iterator>
#include <string>
#include <tuple>

namespace locnet {
namespace {

std::string edge_name(Index i, Index j)
{
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

void check_shape(const Problem& problem, const Positions& x)
{
    if (x.rows() != problem.p() || x.cols() != problem.n()) {
        throw Error(ErrorKind::invalid_argument,
            "positions are " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
            ", expected " + std::to_string(problem.p()) + "x" + std::to_string(problem.n()));
    }
}

Positions corner_anchors(Index p)
{
    const Index count = Index(1) << p;
    Positions a(p, count);
    for (Index k = 0; k < count; ++k) {
        for (Index d = 0; d < p; ++d) a(d, k) = static_cast<double>((k >> d) & 1);
    }
    return a;
}

Positions uniform_points(Index p, Index count, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Positions x(p, count);
    // Column-major fill: node by node.
    for (Index k = 0; k < count; ++k) {
        for (Index d = 0; d < p; ++d) x(d, k) = unif(rng);
    }
    return x;
}

bool connected(Index n, const std::vector<Edge>& edges)
{
    if (n <= 1) return true;
    std::vector<std::vector<Index>> adj(n);
    for (const auto& e : edges) {
        adj[e.i].push_back(e.j);
        adj[e.j].push_back(e.i);
    }
    std::vector<char> seen(n, 0);
    std::queue<Index> q;
    q.push(0);
    seen[0] = 1;
    Index count = 1;
    while (!q.empty()) {
        const Index u = q.front();
        q.pop();
        for (Index v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

} // namespace

Problem::Problem(Index n, Index p,
                 std::vector<Edge> edges,
                 std::vector<double> edge_measurements,
                 Positions anchors,
                 std::vector<AnchorLink> anchor_links)
    : n_(n), p_(p), anchors_(std::move(anchors))
{
    if (n < 1) throw Error(ErrorKind::invalid_argument, "sensor count must be at least 1");
    if (p < 1 || p > max_dim) throw Error(ErrorKind::invalid_argument, "dimension must be 1, 2 or 3");
    if (edges.size() != edge_measurements.size()) {
        throw Error(ErrorKind::invalid_argument, "edge and measurement counts differ");
    }
    if (anchors_.cols() > 0 && anchors_.rows() != p) {
        throw Error(ErrorKind::invalid_argument, "anchor dimension does not match problem dimension");
    }
    if (anchors_.cols() == 0) anchors_.resize(p, 0);
    if (!anchors_.allFinite()) throw Error(ErrorKind::invalid_argument, "anchor positions must be finite");

    std::vector<std::pair<Edge, double>> tagged;
    tagged.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        Edge ed = edges[e];
        if (ed.i < 0 || ed.j < 0 || ed.i >= n || ed.j >= n) {
            throw Error(ErrorKind::invalid_argument, "edge " + edge_name(ed.i, ed.j) + " has an index out of range");
        }
        if (ed.i == ed.j) {
            throw Error(ErrorKind::invalid_argument, "self-loop at sensor " + std::to_string(ed.i));
        }
        const double d = edge_measurements[e];
        if (!std::isfinite(d) || d < 0) {
            throw Error(ErrorKind::malformed_measurement, "edge " + edge_name(ed.i, ed.j) + " measurement " + std::to_string(d));
        }
        if (ed.i > ed.j) std::swap(ed.i, ed.j);
        tagged.emplace_back(ed, d);
    }
    std::sort(tagged.begin(), tagged.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t e = 1; e < tagged.size(); ++e) {
        if (tagged[e].first == tagged[e - 1].first) {
            throw Error(ErrorKind::invalid_argument,
                "duplicate edge " + edge_name(tagged[e].first.i, tagged[e].first.j));
        }
    }
    edges_.reserve(tagged.size());
    edge_meas_.reserve(tagged.size());
    for (const auto& [ed, d] : tagged) {
        edges_.push_back(ed);
        edge_meas_.push_back(d);
    }

    for (const auto& l : anchor_links) {
        if (l.sensor < 0 || l.sensor >= n) {
            throw Error(ErrorKind::invalid_argument, "anchor link references sensor " + std::to_string(l.sensor));
        }
        if (l.anchor < 0 || l.anchor >= anchors_.cols()) {
            throw Error(ErrorKind::invalid_argument, "anchor link references anchor " + std::to_string(l.anchor));
        }
        if (!std::isfinite(l.range) || l.range < 0) {
            throw Error(ErrorKind::malformed_measurement,
                "anchor link " + edge_name(l.sensor, l.anchor) + " range " + std::to_string(l.range));
        }
    }
    std::sort(anchor_links.begin(), anchor_links.end(), [](const AnchorLink& a, const AnchorLink& b) {
        return std::tie(a.sensor, a.anchor) < std::tie(b.sensor, b.anchor);
    });
    for (std::size_t k = 1; k < anchor_links.size(); ++k) {
        if (anchor_links[k].sensor == anchor_links[k - 1].sensor &&
            anchor_links[k].anchor == anchor_links[k - 1].anchor) {
            throw Error(ErrorKind::invalid_argument,
                "duplicate anchor link " + edge_name(anchor_links[k].sensor, anchor_links[k].anchor));
        }
    }
    links_ = std::move(anchor_links);

    adj_.assign(n, {});
    for (Index e = 0; e < num_edges(); ++e) {
        const auto& ed = edges_[e];
        adj_[ed.i].push_back({ed.j, e, 1.0});
        adj_[ed.j].push_back({ed.i, e, -1.0});
    }
    links_by_node_.assign(n, {});
    for (Index k = 0; k < static_cast<Index>(links_.size()); ++k) {
        links_by_node_[links_[k].sensor].push_back(k);
    }
}

Index Problem::max_degree() const
{
    Index best = 0;
    for (const auto& a : adj_) best = std::max(best, static_cast<Index>(a.size()));
    return best;
}

Index Problem::max_anchor_links() const
{
    Index best = 0;
    for (const auto& l : links_by_node_) best = std::max(best, static_cast<Index>(l.size()));
    return best;
}

void validate(const Problem& problem)
{
    for (Index e = 0; e < problem.num_edges(); ++e) {
        const double d = problem.edge_measurements()[e];
        if (!std::isfinite(d) || d < 0) {
            const auto& ed = problem.edges()[e];
            throw Error(ErrorKind::malformed_measurement, "edge " + edge_name(ed.i, ed.j));
        }
    }
    for (const auto& l : problem.anchor_links()) {
        if (!std::isfinite(l.range) || l.range < 0) {
            throw Error(ErrorKind::malformed_measurement, "anchor link " + edge_name(l.sensor, l.anchor));
        }
    }
    if (!connected(problem.n(), problem.edges())) {
        // Report the first sensor not reachable from sensor 0.
        std::vector<char> seen(problem.n(), 0);
        std::queue<Index> q;
        q.push(0);
        seen[0] = 1;
        while (!q.empty()) {
            const Index u = q.front();
            q.pop();
            for (const auto& inc : problem.incidences(u)) {
                if (!seen[inc.neighbor]) {
                    seen[inc.neighbor] = 1;
                    q.push(inc.neighbor);
                }
            }
        }
        const auto it = std::find(seen.begin(), seen.end(), 0);
        throw Error(ErrorKind::disconnected_graph,
            "sensor " + std::to_string(it - seen.begin()) + " is unreachable from sensor 0");
    }
    if (problem.anchor_links().empty()) {
        throw Error(ErrorKind::no_anchor_link, "no sensor is linked to an anchor");
    }
}

std::map<Edge, double> symmetrize_measurements(const DirectedMeasurements& raw)
{
    std::map<Edge, std::pair<double, int>> acc;
    for (const auto& [key, value] : raw) {
        const auto [from, to] = key;
        if (!std::isfinite(value) || value < 0) {
            throw Error(ErrorKind::malformed_measurement,
                "measurement " + edge_name(from, to) + " is " + std::to_string(value));
        }
        if (from == to) throw Error(ErrorKind::invalid_argument, "self-measurement at " + std::to_string(from));
        const Edge e{std::min(from, to), std::max(from, to)};
        auto& slot = acc[e];
        slot.first += value;
        slot.second += 1;
    }
    std::map<Edge, double> out;
    for (const auto& [e, s] : acc) out.emplace(e, s.first / s.second);
    return out;
}

EdgeVector incidence_apply(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    EdgeVector out(problem.p(), problem.num_edges());
    const auto& edges = problem.edges();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        out.col(e) = x.col(edges[e].i) - x.col(edges[e].j);
    }
    return out;
}

Positions incidence_transpose_apply(const Problem& problem, const EdgeVector& e)
{
    if (e.rows() != problem.p() || e.cols() != problem.num_edges()) {
        throw Error(ErrorKind::invalid_argument, "edge vector shape does not match the problem");
    }
    Positions out = Positions::Zero(problem.p(), problem.n());
    for (Index i = 0; i < problem.n(); ++i) {
        for (const auto& inc : problem.incidences(i)) {
            out.col(i) += inc.sign * e.col(inc.edge);
        }
    }
    return out;
}

Positions laplacian_apply(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    Positions out(problem.p(), problem.n());
    for (Index i = 0; i < problem.n(); ++i) {
        Point acc = static_cast<double>(problem.degree(i)) * x.col(i);
        for (const auto& inc : problem.incidences(i)) acc -= x.col(inc.neighbor);
        out.col(i) = acc;
    }
    return out;
}

double lipschitz_fhat(const Problem& problem, LaplacianBound bound)
{
    double lap = 0;
    if (bound == LaplacianBound::twice_max_degree) {
        lap = 2.0 * static_cast<double>(problem.max_degree());
    } else {
        std::vector<std::vector<Index>> nbrs(problem.n());
        for (Index i = 0; i < problem.n(); ++i) {
            for (const auto& inc : problem.incidences(i)) nbrs[i].push_back(inc.neighbor);
            std::sort(nbrs[i].begin(), nbrs[i].end());
        }
        for (const auto& e : problem.edges()) {
            std::vector<Index> common;
            std::set_intersection(nbrs[e.i].begin(), nbrs[e.i].end(),
                                  nbrs[e.j].begin(), nbrs[e.j].end(), std::back_inserter(common));
            const double v = static_cast<double>(problem.degree(e.i) + problem.degree(e.j)) -
                             static_cast<double>(common.size());
            lap = std::max(lap, v);
        }
    }
    return lap + static_cast<double>(problem.max_anchor_links());
}

Topology geometric_topology(const Positions& truth, const Positions& anchors, double radius)
{
    Topology t;
    t.n = truth.cols();
    t.p = truth.rows();
    t.truth = truth;
    t.anchors = anchors;
    t.radius = radius;
    for (Index i = 0; i < t.n; ++i) {
        for (Index j = i + 1; j < t.n; ++j) {
            if ((truth.col(i) - truth.col(j)).norm() <= radius) t.edges.push_back({i, j});
        }
    }
    for (Index i = 0; i < t.n; ++i) {
        for (Index k = 0; k < anchors.cols(); ++k) {
            if ((truth.col(i) - anchors.col(k)).norm() <= radius) t.anchor_links.emplace_back(i, k);
        }
    }
    return t;
}

bool satisfies_assumption(const Topology& topology)
{
    return !topology.anchor_links.empty() && connected(topology.n, topology.edges);
}

namespace {

void check_generation_args(const GeometricOptions& opts)
{
    if (opts.n < 1) throw Error(ErrorKind::invalid_argument, "n must be at least 1");
    if (opts.p < 1 || opts.p > max_dim) throw Error(ErrorKind::invalid_argument, "dimension must be 1, 2 or 3");
    if (opts.max_attempts < 1) throw Error(ErrorKind::invalid_argument, "max_attempts must be at least 1");
}

Positions draw_anchors(const GeometricOptions& opts, std::mt19937_64& rng)
{
    return opts.anchors_at_corners ? corner_anchors(opts.p) : uniform_points(opts.p, opts.p + 1, rng);
}

} // namespace

Topology generate_geometric(const GeometricOptions& opts)
{
    check_generation_args(opts);
    if (!(opts.connect_radius > 0)) throw Error(ErrorKind::invalid_argument, "connect_radius must be positive");
    std::mt19937_64 rng(opts.seed);
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        const Positions anchors = draw_anchors(opts, rng);
        const Positions truth = uniform_points(opts.p, opts.n, rng);
        Topology t = geometric_topology(truth, anchors, opts.connect_radius);
        if (satisfies_assumption(t)) return t;
    }
    throw Error(ErrorKind::generation_failure,
        "no connected, anchored network after " + std::to_string(opts.max_attempts) + " draws");
}

Topology generate_with_average_degree(const GeometricOptions& opts, double target_degree)
{
    check_generation_args(opts);
    if (!(target_degree >= 0)) throw Error(ErrorKind::invalid_argument, "target degree must be nonnegative");
    std::mt19937_64 rng(opts.seed);
    const Index n = opts.n;
    const Index max_edges = n * (n - 1) / 2;
    const Index wanted = std::clamp<Index>(
        static_cast<Index>(std::llround(target_degree * static_cast<double>(n) / 2.0)), 0, max_edges);
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        const Positions anchors = draw_anchors(opts, rng);
        const Positions truth = uniform_points(opts.p, n, rng);
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(max_edges));
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) dists.push_back((truth.col(i) - truth.col(j)).norm());
        }
        std::sort(dists.begin(), dists.end());
        // The smallest radius that admits `wanted` edges. With no edges
        // wanted (n = 1), fall back to the half-diagonal so anchors are heard.
        const double radius = wanted > 0 ? dists[static_cast<std::size_t>(wanted - 1)]
                                         : std::sqrt(static_cast<double>(opts.p));
        Topology t = geometric_topology(truth, anchors, radius);
        if (satisfies_assumption(t)) return t;
    }
    throw Error(ErrorKind::generation_failure,
        "no connected, anchored network with average degree " + std::to_string(target_degree) +
        " after " + std::to_string(opts.max_attempts) + " draws");
}

Problem exact_problem(const Topology& topology)
{
    std::vector<double> d;
    d.reserve(topology.edges.size());
    for (const auto& e : topology.edges) d.push_back((topology.truth.col(e.i) - topology.truth.col(e.j)).norm());
    std::vector<AnchorLink> links;
    for (const auto& [i, k] : topology.anchor_links) {
        links.push_back({i, k, (topology.truth.col(i) - topology.anchors.col(k)).norm()});
    }
    return Problem(topology.n, topology.p, topology.edges, std::move(d), topology.anchors, std::move(links));
}

} // namespace locnet
