#pragma once
#include <locnet/network.hpp>
#include <locnet/types.hpp>
#include <map>
#include <utility>
#include <vector>

namespace locnet {

/// Relaxed cost broken into its parcels. Edge terms follow edge order,
/// anchor terms follow Problem::anchor_links() order.
struct CostReport
{
    double value = 0;
    std::vector<double> per_edge_terms;
    std::vector<double> per_anchor_terms;
};

/// Bounds on f* - fhat* computed at a minimizer of the relaxation.
struct GapCertificate
{
    double fhat_star = 0;
    /// Nonconvex cost of the relaxed terms that vanish at x*.
    double tight_bound = 0;
    /// Half the sum of all squared measurements.
    double apriori_bound = 0;
    std::vector<Edge> slack_edges;
    std::vector<std::pair<Index, Index>> slack_anchor_links; // (sensor, anchor)
};

/// Convexified terms at or below this value count as zero when forming the
/// slack sets of a gap certificate.
inline constexpr double slack_tolerance = 1e-12;

/// Maximum-likelihood (nonconvex) cost: half squared sphere distances.
double eval_f(const Problem& problem, const Positions& x);

/// Disk-relaxed cost with per-term breakdown.
CostReport eval_fhat(const Problem& problem, const Positions& x);

/// Same value as eval_fhat(...).value without the term vectors.
double fhat_value(const Problem& problem, const Positions& x);

/// Full gradient assembled as Lx - A^T P_B(Ax) + anchor terms.
Positions grad_fhat(const Problem& problem, const Positions& x);

/// Block i of the gradient, from x_i, the neighbors of i and node-i
/// measurements only.
Point grad_fhat_node(const Problem& problem, const Positions& x, Index i);

/// Full gradient assembled node by node with grad_fhat_node's kernel.
/// Cheaper than grad_fhat; agrees with it to rounding.
void grad_fhat_nodewise(const Problem& problem, const Positions& x, Positions& out);

/// Single-source problem seen by sensor i when its neighbors are frozen:
///   edge_weight * sum_j d^2(z, Ball(x_j, d_ij)) + 1/2 sum_k d^2(z, Ball(a_k, r_ik)).
/// The per-node decomposition of the relaxed cost splits each edge term in
/// two, which gives edge_weight = 1/4. Restricting the full cost to block i
/// instead keeps the whole edge term, edge_weight = 1/2.
struct NodeSlice
{
    Index sensor = 0;
    Positions neighbor_centers;
    std::vector<double> neighbor_ranges;
    Positions anchor_centers;
    std::vector<double> anchor_ranges;
    double edge_weight = 0.25;

    Index dim() const { return neighbor_centers.rows(); }
};

inline constexpr double split_edge_weight = 0.25;
inline constexpr double block_edge_weight = 0.5;

NodeSlice make_slice(const Problem& problem, Index i, const Positions& x,
                     double edge_weight = split_edge_weight);

/// Neighbor positions are looked up by sensor index; every neighbor of i
/// must be present.
NodeSlice make_slice(const Problem& problem, Index i, const std::map<Index, Point>& neighbor_positions,
                     double edge_weight = split_edge_weight);

double eval_slice(const NodeSlice& slice, const Point& z);
Point grad_slice(const NodeSlice& slice, const Point& z);

/// Lipschitz constant of grad_slice: 2 * edge_weight * |N_i| + |A_i|.
double slice_lipschitz(const NodeSlice& slice);

/// Optimality-gap certificate at x_star. fhat_star is taken as given.
GapCertificate gap_certificate(const Problem& problem, const Positions& x_star, double fhat_star,
                               double zero_tolerance = slack_tolerance);

} // namespace locnet
