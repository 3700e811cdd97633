#pragma once
// Test fixtures and independent oracles. Nothing here calls the cost or
// operator code paths it is used to check.
#include <locnet/geometry.hpp>
#include <locnet/network.hpp>
#include <locnet/seed.hpp>
#include <locnet/simulator.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace locnet::test {

// ---------------------------------------------------------------- fixtures

/// One sensor, anchors (0,0) and (2,0), both ranges 1: the balls touch at
/// (1,0), the unique zero-cost point.
inline Problem tangent_anchor_problem()
{
    Positions anchors(2, 2);
    anchors << 0, 2,
               0, 0;
    return Problem(1, 2, {}, {}, anchors, {{0, 0, 1.0}, {0, 1, 1.0}});
}

inline Positions tangent_anchor_truth()
{
    Positions x(2, 1);
    x << 1, 0;
    return x;
}

/// One sensor, anchor at the origin with range 1.
inline Problem single_anchor_problem()
{
    Positions anchors = Positions::Zero(2, 1);
    return Problem(1, 2, {}, {}, anchors, {{0, 0, 1.0}});
}

/// 1-D star: the sensor sits at 3 and hears anchors at 2, 4 and 5.
inline Topology star_topology()
{
    Topology t;
    t.n = 1;
    t.p = 1;
    t.truth = Positions::Constant(1, 1, 3.0);
    t.anchors.resize(1, 3);
    t.anchors << 2.0, 4.0, 5.0;
    t.anchor_links = {{0, 0}, {0, 1}, {0, 2}};
    return t;
}

/// Random connected network with corner anchors and noisy ranges.
inline Topology random_topology(Index n, std::uint64_t seed, double avg_degree = 4.3, Index p = 2)
{
    GeometricOptions g;
    g.n = n;
    g.p = p;
    g.seed = seed;
    return generate_with_average_degree(g, avg_degree);
}

inline Problem random_problem(Index n, std::uint64_t seed, double sigma = 0.05, double avg_degree = 4.3, Index p = 2)
{
    return gen_measurements(random_topology(n, seed, avg_degree, p), sigma, derive_seed(seed, {stream::noise}));
}

inline Positions random_positions(Index p, Index n, std::mt19937_64& rng, double lo = -0.5, double hi = 1.5)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Positions x(p, n);
    for (Index i = 0; i < n; ++i) {
        for (Index d = 0; d < p; ++d) x(d, i) = u(rng);
    }
    return x;
}

// ----------------------------------------------------------------- oracles

/// Dense C (x) I_p with +1 at the smaller endpoint, built entry by entry.
inline Eigen::MatrixXd dense_incidence(const Problem& problem)
{
    const Index p = problem.p();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(problem.num_edges() * p, problem.n() * p);
    for (Index e = 0; e < problem.num_edges(); ++e) {
        const Index i = problem.edges()[e].i;
        const Index j = problem.edges()[e].j;
        for (Index d = 0; d < p; ++d) {
            a(e * p + d, i * p + d) = 1.0;
            a(e * p + d, j * p + d) = -1.0;
        }
    }
    return a;
}

/// Dense L (x) I_p from an explicit degree/adjacency count.
inline Eigen::MatrixXd dense_laplacian(const Problem& problem)
{
    const Index p = problem.p();
    const Index n = problem.n();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n * p, n * p);
    for (const auto& e : problem.edges()) {
        for (Index d = 0; d < p; ++d) {
            l(e.i * p + d, e.i * p + d) += 1;
            l(e.j * p + d, e.j * p + d) += 1;
            l(e.i * p + d, e.j * p + d) -= 1;
            l(e.j * p + d, e.i * p + d) -= 1;
        }
    }
    return l;
}

inline Eigen::VectorXd flatten(const Positions& x)
{
    return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

/// Central differences with step h on every coordinate.
inline Positions central_difference(const std::function<double(const Positions&)>& f, const Positions& x,
                                    double h = 1e-6)
{
    Positions g(x.rows(), x.cols());
    Positions xp = x;
    for (Index k = 0; k < x.size(); ++k) {
        const double orig = xp.data()[k];
        xp.data()[k] = orig + h;
        const double fp = f(xp);
        xp.data()[k] = orig - h;
        const double fm = f(xp);
        xp.data()[k] = orig;
        g.data()[k] = (fp - fm) / (2 * h);
    }
    return g;
}

/// Distance from the point's term arguments to the nearest ball boundary,
/// computed directly from measurements.
inline double boundary_clearance(const Problem& problem, const Positions& x)
{
    double best = std::numeric_limits<double>::infinity();
    for (Index e = 0; e < problem.num_edges(); ++e) {
        const auto& ed = problem.edges()[e];
        best = std::min(best, std::abs((x.col(ed.i) - x.col(ed.j)).norm() - problem.edge_measurements()[e]));
    }
    for (const auto& l : problem.anchor_links()) {
        best = std::min(best, std::abs((x.col(l.sensor) - problem.anchors().col(l.anchor)).norm() - l.range));
    }
    return best;
}

/// Naive double loop over all sensor pairs and all (sensor, anchor) pairs,
/// looking up measurements by linear search.
inline double brute_force_f(const Problem& problem, const Positions& x, bool relaxed)
{
    double total = 0;
    for (Index i = 0; i < problem.n(); ++i) {
        for (Index j = i + 1; j < problem.n(); ++j) {
            for (Index e = 0; e < problem.num_edges(); ++e) {
                const auto& ed = problem.edges()[e];
                if (ed.i == i && ed.j == j) {
                    double gap = (x.col(i) - x.col(j)).norm() - problem.edge_measurements()[e];
                    if (relaxed) gap = std::max(0.0, gap);
                    total += 0.5 * gap * gap;
                }
            }
        }
        for (Index k = 0; k < problem.num_anchors(); ++k) {
            for (const auto& l : problem.anchor_links()) {
                if (l.sensor == i && l.anchor == k) {
                    double gap = (x.col(i) - problem.anchors().col(k)).norm() - l.range;
                    if (relaxed) gap = std::max(0.0, gap);
                    total += 0.5 * gap * gap;
                }
            }
        }
    }
    return total;
}

/// Discrete Legendre-Fenchel biconjugate of samples f on grid x, using the
/// same grid as slopes.
inline std::vector<double> discrete_biconjugate(const std::vector<double>& x, const std::vector<double>& f,
                                                const std::vector<double>& slopes)
{
    std::vector<double> conj(slopes.size());
    for (std::size_t s = 0; s < slopes.size(); ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < x.size(); ++k) best = std::max(best, slopes[s] * x[k] - f[k]);
        conj[s] = best;
    }
    std::vector<double> bic(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < slopes.size(); ++s) best = std::max(best, slopes[s] * x[k] - conj[s]);
        bic[k] = best;
    }
    return bic;
}

/// Golden-section polish of a 1-D function on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200)
{
    const double r = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a); fd = f(d);
        }
    }
    return std::min(fc, fd);
}

/// Global minimum of the 1-D star cost: grid search with step 1e-3 over
/// [lo, hi], then golden-section polish around the best grid point.
inline double star_true_minimum(const Problem& problem, double lo = -3.0, double hi = 10.0)
{
    auto f = [&](double t) {
        double total = 0;
        for (const auto& l : problem.anchor_links()) {
            const double gap = std::abs(t - problem.anchors()(0, l.anchor)) - l.range;
            total += 0.5 * gap * gap;
        }
        return total;
    };
    double best = std::numeric_limits<double>::infinity(), arg = lo;
    const int steps = static_cast<int>(std::round((hi - lo) / 1e-3));
    for (int s = 0; s <= steps; ++s) {
        const double t = lo + 1e-3 * s;
        const double v = f(t);
        if (v < best) {
            best = v;
            arg = t;
        }
    }
    return std::min(best, golden_min(f, arg - 1e-3, arg + 1e-3));
}

/// Minimum of a convex 2-D function: grid search over [lo, hi]^2 followed by
/// coordinate-wise golden-section sweeps.
inline double grid_polish_min_2d(const std::function<double(double, double)>& f, double lo, double hi,
                                 int grid = 400, int sweeps = 60)
{
    double best = std::numeric_limits<double>::infinity();
    double bx = lo, by = lo;
    const double step = (hi - lo) / grid;
    for (int a = 0; a <= grid; ++a) {
        for (int b = 0; b <= grid; ++b) {
            const double x = lo + step * a, y = lo + step * b;
            const double v = f(x, y);
            if (v < best) {
                best = v;
                bx = x;
                by = y;
            }
        }
    }
    double width = step;
    for (int s = 0; s < sweeps; ++s) {
        const double cy = by;
        auto fx = [&](double x) { return f(x, cy); };
        // Locate the argmin along x by golden section on a bracket.
        double a = bx - width, b = bx + width;
        for (int it = 0; it < 100; ++it) {
            const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
            if (fx(m1) < fx(m2)) b = m2; else a = m1;
        }
        bx = (a + b) / 2;
        const double cx = bx;
        auto fy = [&](double y) { return f(cx, y); };
        a = by - width;
        b = by + width;
        for (int it = 0; it < 100; ++it) {
            const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
            if (fy(m1) < fy(m2)) b = m2; else a = m1;
        }
        by = (a + b) / 2;
        best = std::min(best, f(bx, by));
    }
    return best;
}

} // namespace locnet::test
