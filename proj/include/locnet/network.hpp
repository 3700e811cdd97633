#pragma once
#include <locnet/types.hpp>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace locnet {

/// Undirected sensor-sensor edge, stored with i < j. The incidence row of
/// the edge carries +1 at i and -1 at j.
struct Edge
{
    Index i = 0;
    Index j = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct AnchorLink
{
    Index sensor = 0;
    Index anchor = 0;
    double range = 0;
};

/// An edge as seen from one of its endpoints.
struct Incidence
{
    Index neighbor;
    Index edge;
    double sign; // +1 when the node is the smaller endpoint
};

/// Immutable localization instance: sensor graph, range measurements and
/// anchor positions. Ground truth is deliberately not part of this type.
class Problem
{
public:
    /// Edges may be given in any order and orientation; they are
    /// canonicalized to (min, max) and sorted, with measurements permuted
    /// alongside. Anchor links are sorted by (sensor, anchor). Structural
    /// defects throw here; connectivity is checked by validate().
    Problem(Index n, Index p,
            std::vector<Edge> edges,
            std::vector<double> edge_measurements,
            Positions anchors,
            std::vector<AnchorLink> anchor_links);

    Index n() const { return n_; }
    Index p() const { return p_; }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }
    Index num_anchors() const { return anchors_.cols(); }

    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<double>& edge_measurements() const { return edge_meas_; }
    const Positions& anchors() const { return anchors_; }
    const std::vector<AnchorLink>& anchor_links() const { return links_; }

    const std::vector<Incidence>& incidences(Index i) const { return adj_[i]; }
    /// Indices into anchor_links() for sensor i.
    const std::vector<Index>& links_of(Index i) const { return links_by_node_[i]; }
    Index degree(Index i) const { return static_cast<Index>(adj_[i].size()); }
    Index max_degree() const;
    Index max_anchor_links() const;

private:
    Index n_;
    Index p_;
    std::vector<Edge> edges_;
    std::vector<double> edge_meas_;
    Positions anchors_;
    std::vector<AnchorLink> links_;
    std::vector<std::vector<Incidence>> adj_;
    std::vector<std::vector<Index>> links_by_node_;
};

/// Checks structural well-formedness, measurement sanity, connectivity of
/// the sensor graph and that at least one sensor is linked to an anchor.
/// Throws Error naming the offending element.
void validate(const Problem& problem);

/// Directed measurement map keyed by (from, to).
using DirectedMeasurements = std::map<std::pair<Index, Index>, double>;

/// Averages the two directions of each pair when both are present. Keys of
/// the result are canonical (i < j) edges.
std::map<Edge, double> symmetrize_measurements(const DirectedMeasurements& raw);

/// Ax: column e holds x_i - x_j for edge e = (i, j).
EdgeVector incidence_apply(const Problem& problem, const Positions& x);

/// A^T e: node i accumulates +e_k or -e_k over its incident edges.
Positions incidence_transpose_apply(const Problem& problem, const EdgeVector& e);

/// (Lx)_i = deg(i) x_i - sum of neighbor positions.
Positions laplacian_apply(const Problem& problem, const Positions& x);

enum class LaplacianBound
{
    twice_max_degree,   // 2 * max degree
    edge_degree_sum,    // max over edges of deg(i) + deg(j) - common(i, j)
};

/// Lipschitz constant of the relaxed cost gradient: a bound on
/// lambda_max(L) plus the largest number of anchor links at one sensor.
double lipschitz_fhat(const Problem& problem,
                      LaplacianBound bound = LaplacianBound::twice_max_degree);

/// Network topology before measurements are taken, with ground truth.
struct Topology
{
    Index n = 0;
    Index p = 0;
    std::vector<Edge> edges;
    Positions anchors;
    std::vector<std::pair<Index, Index>> anchor_links; // (sensor, anchor)
    Positions truth;
    double radius = 0;

    double average_degree() const
    {
        return n == 0 ? 0.0 : 2.0 * static_cast<double>(edges.size()) / static_cast<double>(n);
    }
};

struct GeometricOptions
{
    Index n = 10;
    Index p = 2;
    double connect_radius = 0.5;
    bool anchors_at_corners = true;
    std::uint64_t seed = 0;
    int max_attempts = 100;
};

/// Random geometric network in the unit square/cube. Anchors sit at the
/// 2^p corners when requested, otherwise p + 1 anchors are drawn uniformly.
/// Redraws positions until the graph is connected and some sensor hears an
/// anchor.
Topology generate_geometric(const GeometricOptions& opts);

/// Same as generate_geometric, but the connectivity radius is chosen per
/// draw (as an order statistic of the pairwise distances) so the average
/// node degree is as close as possible to target_degree.
/// opts.connect_radius is ignored.
Topology generate_with_average_degree(const GeometricOptions& opts, double target_degree);

/// Builds the topology induced by `radius` on fixed positions.
Topology geometric_topology(const Positions& truth, const Positions& anchors, double radius);

/// True when the topology satisfies the connectivity/anchor assumption.
bool satisfies_assumption(const Topology& topology);

/// Problem with exact (noise-free) measurements for a topology.
Problem exact_problem(const Topology& topology);

} // namespace locnet
