#include <locnet/cost.hpp>
#include <locnet/geometry.hpp>
#include <string>

namespace locnet {
namespace {

void check_shape(const Problem& problem, const Positions& x)
{
    if (x.rows() != problem.p() || x.cols() != problem.n()) {
        throw Error(ErrorKind::invalid_argument, "positions do not match the problem shape");
    }
}

void check_sensor(const Problem& problem, Index i)
{
    if (i < 0 || i >= problem.n()) {
        throw Error(ErrorKind::invalid_argument, "invalid sensor index " + std::to_string(i));
    }
}

} // namespace

double eval_f(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    const Point origin = Point::Zero(problem.p());
    double total = 0;
    const auto& edges = problem.edges();
    const auto& d = problem.edge_measurements();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        total += phi_sphere(x.col(edges[e].i) - x.col(edges[e].j), origin, d[e]);
    }
    for (const auto& l : problem.anchor_links()) {
        total += phi_sphere(x.col(l.sensor), problem.anchors().col(l.anchor), l.range);
    }
    return total;
}

CostReport eval_fhat(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    const Point origin = Point::Zero(problem.p());
    CostReport report;
    report.per_edge_terms.reserve(problem.edges().size());
    report.per_anchor_terms.reserve(problem.anchor_links().size());
    const auto& edges = problem.edges();
    const auto& d = problem.edge_measurements();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        const double term = phi_ball(x.col(edges[e].i) - x.col(edges[e].j), origin, d[e]);
        report.per_edge_terms.push_back(term);
        report.value += term;
    }
    for (const auto& l : problem.anchor_links()) {
        const double term = phi_ball(x.col(l.sensor), problem.anchors().col(l.anchor), l.range);
        report.per_anchor_terms.push_back(term);
        report.value += term;
    }
    return report;
}

double fhat_value(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    const Point origin = Point::Zero(problem.p());
    double total = 0;
    const auto& edges = problem.edges();
    const auto& d = problem.edge_measurements();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        total += phi_ball(x.col(edges[e].i) - x.col(edges[e].j), origin, d[e]);
    }
    for (const auto& l : problem.anchor_links()) {
        total += phi_ball(x.col(l.sensor), problem.anchors().col(l.anchor), l.range);
    }
    return total;
}

Positions grad_fhat(const Problem& problem, const Positions& x)
{
    check_shape(problem, x);
    const Point origin = Point::Zero(problem.p());
    EdgeVector proj = incidence_apply(problem, x);
    const auto& d = problem.edge_measurements();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        proj.col(e) = project_ball(proj.col(e), origin, d[e]);
    }
    Positions g = laplacian_apply(problem, x) - incidence_transpose_apply(problem, proj);
    for (const auto& l : problem.anchor_links()) {
        g.col(l.sensor) += x.col(l.sensor) - project_ball(x.col(l.sensor), problem.anchors().col(l.anchor), l.range);
    }
    return g;
}

namespace {

// Block i of the gradient. Projection onto an origin-centered ball is odd,
// so both endpoints of an edge can use x_i - x_j from their own side.
Point node_gradient(const Problem& problem, const Positions& x, Index i)
{
    const Point origin = Point::Zero(problem.p());
    const auto& d = problem.edge_measurements();
    Point g = Point::Zero(problem.p());
    for (const auto& inc : problem.incidences(i)) {
        g += grad_phi_ball(x.col(i) - x.col(inc.neighbor), origin, d[inc.edge]);
    }
    const auto& links = problem.anchor_links();
    for (Index k : problem.links_of(i)) {
        g += grad_phi_ball(x.col(i), problem.anchors().col(links[k].anchor), links[k].range);
    }
    return g;
}

} // namespace

Point grad_fhat_node(const Problem& problem, const Positions& x, Index i)
{
    check_shape(problem, x);
    check_sensor(problem, i);
    return node_gradient(problem, x, i);
}

void grad_fhat_nodewise(const Problem& problem, const Positions& x, Positions& out)
{
    check_shape(problem, x);
    out.resize(problem.p(), problem.n());
    for (Index i = 0; i < problem.n(); ++i) out.col(i) = node_gradient(problem, x, i);
}

namespace {

NodeSlice slice_skeleton(const Problem& problem, Index i, double edge_weight)
{
    check_sensor(problem, i);
    if (!(edge_weight > 0)) throw Error(ErrorKind::invalid_argument, "slice edge weight must be positive");
    NodeSlice s;
    s.sensor = i;
    s.edge_weight = edge_weight;
    s.neighbor_centers.resize(problem.p(), problem.degree(i));
    s.neighbor_ranges.reserve(problem.incidences(i).size());
    for (const auto& inc : problem.incidences(i)) s.neighbor_ranges.push_back(problem.edge_measurements()[inc.edge]);
    const auto& links = problem.links_of(i);
    s.anchor_centers.resize(problem.p(), static_cast<Index>(links.size()));
    for (std::size_t k = 0; k < links.size(); ++k) {
        const auto& l = problem.anchor_links()[links[k]];
        s.anchor_centers.col(static_cast<Index>(k)) = problem.anchors().col(l.anchor);
        s.anchor_ranges.push_back(l.range);
    }
    return s;
}

} // namespace

NodeSlice make_slice(const Problem& problem, Index i, const Positions& x, double edge_weight)
{
    check_shape(problem, x);
    NodeSlice s = slice_skeleton(problem, i, edge_weight);
    Index col = 0;
    for (const auto& inc : problem.incidences(i)) s.neighbor_centers.col(col++) = x.col(inc.neighbor);
    return s;
}

NodeSlice make_slice(const Problem& problem, Index i, const std::map<Index, Point>& neighbor_positions,
                     double edge_weight)
{
    NodeSlice s = slice_skeleton(problem, i, edge_weight);
    Index col = 0;
    for (const auto& inc : problem.incidences(i)) {
        const auto it = neighbor_positions.find(inc.neighbor);
        if (it == neighbor_positions.end()) {
            throw Error(ErrorKind::invalid_argument,
                "missing position of neighbor " + std::to_string(inc.neighbor) + " of sensor " + std::to_string(i));
        }
        if (it->second.size() != problem.p()) {
            throw Error(ErrorKind::invalid_argument, "neighbor position has the wrong dimension");
        }
        s.neighbor_centers.col(col++) = it->second;
    }
    return s;
}

double eval_slice(const NodeSlice& s, const Point& z)
{
    if (z.size() != s.dim()) throw Error(ErrorKind::invalid_argument, "slice point has the wrong dimension");
    // phi_ball is already half the squared distance.
    double edges = 0;
    for (Index j = 0; j < s.neighbor_centers.cols(); ++j) {
        edges += phi_ball(z, s.neighbor_centers.col(j), s.neighbor_ranges[j]);
    }
    double anchors = 0;
    for (Index k = 0; k < s.anchor_centers.cols(); ++k) {
        anchors += phi_ball(z, s.anchor_centers.col(k), s.anchor_ranges[k]);
    }
    return 2.0 * s.edge_weight * edges + anchors;
}

Point grad_slice(const NodeSlice& s, const Point& z)
{
    if (z.size() != s.dim()) throw Error(ErrorKind::invalid_argument, "slice point has the wrong dimension");
    Point edges = Point::Zero(z.size());
    for (Index j = 0; j < s.neighbor_centers.cols(); ++j) {
        edges += grad_phi_ball(z, s.neighbor_centers.col(j), s.neighbor_ranges[j]);
    }
    Point g = (2.0 * s.edge_weight) * edges;
    for (Index k = 0; k < s.anchor_centers.cols(); ++k) {
        g += grad_phi_ball(z, s.anchor_centers.col(k), s.anchor_ranges[k]);
    }
    return g;
}

double slice_lipschitz(const NodeSlice& s)
{
    return 2.0 * s.edge_weight * static_cast<double>(s.neighbor_centers.cols()) +
           static_cast<double>(s.anchor_centers.cols());
}

GapCertificate gap_certificate(const Problem& problem, const Positions& x_star, double fhat_star,
                               double zero_tolerance)
{
    check_shape(problem, x_star);
    const Point origin = Point::Zero(problem.p());
    GapCertificate cert;
    cert.fhat_star = fhat_star;
    const auto& edges = problem.edges();
    const auto& d = problem.edge_measurements();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        const auto z = x_star.col(edges[e].i) - x_star.col(edges[e].j);
        if (phi_ball(z, origin, d[e]) <= zero_tolerance) {
            cert.slack_edges.push_back(edges[e]);
            cert.tight_bound += phi_sphere(z, origin, d[e]);
        }
        cert.apriori_bound += 0.5 * d[e] * d[e];
    }
    for (const auto& l : problem.anchor_links()) {
        const auto a = problem.anchors().col(l.anchor);
        if (phi_ball(x_star.col(l.sensor), a, l.range) <= zero_tolerance) {
            cert.slack_anchor_links.emplace_back(l.sensor, l.anchor);
            cert.tight_bound += phi_sphere(x_star.col(l.sensor), a, l.range);
        }
        cert.apriori_bound += 0.5 * l.range * l.range;
    }
    return cert;
}

} // namespace locnet
