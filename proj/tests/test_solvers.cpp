#include <locnet/solvers.hpp>
#include "support.hpp"
#include <doctest.h>

using namespace locnet;

namespace {

SolverOptions given(const Positions& x0)
{
    SolverOptions o;
    o.init_rule = InitRule::given;
    o.initial = x0;
    return o;
}

Positions point2(double a, double b)
{
    Positions x(2, 1);
    x << a, b;
    return x;
}

} // namespace

TEST_CASE("nesterov_weight")
{
    CHECK(nesterov_weight(1) == -0.5);
    CHECK(nesterov_weight(2) == 0.0);
    CHECK(nesterov_weight(5) == 0.5);
    CHECK_THROWS_AS(nesterov_weight(0), Error);
}

TEST_CASE("option and name parsing")
{
    CHECK(parse_stop_rule("gradient-norm") == StopRule::gradient_norm);
    CHECK(parse_stop_rule("relative-improvement") == StopRule::relative_improvement);
    CHECK(parse_stop_rule("fixed-iterations") == StopRule::fixed_iterations);
    CHECK_THROWS_AS(parse_stop_rule("nope"), Error);

    SolverOptions o;
    CHECK_NOTHROW(check_options(o));
    o.epsilon_g = 0;
    CHECK_THROWS_AS(check_options(o), Error);
    o = SolverOptions{};
    o.max_iterations = 0;
    CHECK_THROWS_AS(check_options(o), Error);
    o = SolverOptions{};
    o.init_rule = InitRule::given;
    CHECK_THROWS_AS(check_options(o), Error);
}

TEST_CASE("activation sequence")
{
    CHECK_THROWS_AS(ActivationSequence(std::vector<double>{0.5, 0.0, 0.5}, 1), Error);
    CHECK_THROWS_AS(ActivationSequence(std::vector<double>{0.5, 0.6}, 1), Error);
    CHECK_THROWS_AS(ActivationSequence(Index{0}, 1), Error);

    ActivationSequence a(5, 99), b(5, 99);
    std::vector<int> counts(5, 0);
    for (int t = 0; t < 5000; ++t) {
        const Index i = a.next();
        CHECK(i == b.next());
        ++counts[static_cast<std::size_t>(i)];
    }
    for (int c : counts) CHECK(std::abs(c - 1000) < 150);

    ActivationSequence w(std::vector<double>{0.7, 0.2, 0.1}, 3);
    std::vector<int> wc(3, 0);
    for (int t = 0; t < 10000; ++t) ++wc[static_cast<std::size_t>(w.next())];
    CHECK(std::abs(wc[0] - 7000) < 300);
    CHECK(std::abs(wc[2] - 1000) < 200);
}

TEST_CASE("initial positions are seeded and in the unit box")
{
    const Problem pr = test::random_problem(10, 1);
    SolverOptions o;
    o.seed = 17;
    const Positions a = initial_positions(pr, o), b = initial_positions(pr, o);
    CHECK(a == b);
    CHECK(((a.array() >= 0) && (a.array() <= 1)).all());
    o.seed = 18;
    CHECK(initial_positions(pr, o) != a);
}

TEST_CASE("parallel: one-step exact on the single-anchor problem")
{
    SolverOptions o = given(point2(2, 0));
    const SolverTrace t = solve_parallel(test::single_anchor_problem(), o);
    REQUIRE(t.iterations() == 1);
    CHECK(t.estimate(0, 0) == doctest::Approx(1.0));
    CHECK(t.estimate(1, 0) == 0.0);
    CHECK(t.final_fhat() == 0.0);
    CHECK(t.termination == Termination::converged);
    CHECK(t.lipschitz == 1.0);
}

TEST_CASE("parallel: tangent anchors converge to the contact point")
{
    // Along x = 1 the relaxed cost grows like y^4 / 4, so the gradient only
    // pins y to about eps_g^(1/3).
    SolverOptions o;
    o.seed = 3;
    const SolverTrace t = solve_parallel(test::tangent_anchor_problem(), o);
    CHECK(t.termination == Termination::converged);
    CHECK(t.records.back().grad_norm <= 1e-6);
    CHECK((t.estimate - test::tangent_anchor_truth()).norm() <= 2 * std::cbrt(o.epsilon_g));
    CHECK(t.final_fhat() <= 1e-8);

    // Started on the axis the problem is strongly convex along x.
    o = given(point2(0.3, 0));
    const SolverTrace a = solve_parallel(test::tangent_anchor_problem(), o);
    CHECK(a.termination == Termination::converged);
    CHECK((a.estimate - test::tangent_anchor_truth()).norm() <= 1e-5);
}

TEST_CASE("parallel: rate bound against a long reference run")
{
    const Problem pr = test::random_problem(10, 21);
    SolverOptions ref;
    ref.seed = 1;
    ref.stop_rule = StopRule::fixed_iterations;
    ref.max_iterations = 100000;
    ref.keep_trace = false;
    const SolverTrace r = solve_parallel(pr, ref);

    SolverOptions o;
    o.seed = 2;
    o.stop_rule = StopRule::fixed_iterations;
    o.max_iterations = 3000;
    const SolverTrace t = solve_parallel(pr, o);
    const double radius = (initial_positions(pr, o) - r.estimate).squaredNorm();
    const double fstar = r.final_fhat();
    int violations = 0;
    for (const auto& rec : t.records) {
        const double k1 = static_cast<double>(rec.k + 1);
        if (rec.fhat - fstar > 2 * t.lipschitz * radius / (k1 * k1) + 1e-12) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("parallel: broadcast accounting and fixed iterations")
{
    const Problem pr = test::random_problem(10, 22);
    SolverOptions o;
    o.stop_rule = StopRule::fixed_iterations;
    o.max_iterations = 2000;
    const SolverTrace t = solve_parallel(pr, o);
    CHECK(t.iterations() == 2000);
    CHECK(t.termination == Termination::completed);
    CHECK(t.records.back().broadcasts_per_sensor == 2000.0);
    for (auto b : t.broadcasts) CHECK(b == 2000);
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        CHECK(t.records[k].k == static_cast<std::int64_t>(k + 1));
        CHECK(t.records[k].broadcasts_per_sensor == static_cast<double>(k + 1));
    }
}

TEST_CASE("parallel: budget exhaustion and relative improvement")
{
    const Problem pr = test::random_problem(10, 23);
    SolverOptions o;
    o.max_iterations = 5;
    o.epsilon_g = 1e-14;
    CHECK(solve_parallel(pr, o).termination == Termination::budget_exhausted);

    o = SolverOptions{};
    o.stop_rule = StopRule::relative_improvement;
    const SolverTrace t = solve_parallel(pr, o);
    CHECK(t.termination == Termination::converged);
    REQUIRE(t.iterations() >= 2);
    const double a = t.records[t.records.size() - 2].fhat, b = t.records.back().fhat;
    CHECK(std::abs(a - b) <= 1e-6 * std::abs(a));
}

TEST_CASE("solvers are deterministic")
{
    const Problem pr = test::random_problem(10, 24);
    SolverOptions o;
    o.seed = 77;
    o.max_iterations = 3000;
    o.record_iterates = true;
    for (int s = 0; s < 3; ++s) {
        const SolverTrace a = s == 0 ? solve_parallel(pr, o)
                              : s == 1 ? solve_async_exact(pr, ActivationSequence(10, 5), o)
                                       : solve_async_inexact(pr, o);
        const SolverTrace b = s == 0 ? solve_parallel(pr, o)
                              : s == 1 ? solve_async_exact(pr, ActivationSequence(10, 5), o)
                                       : solve_async_inexact(pr, o);
        REQUIRE(a.records.size() == b.records.size());
        CHECK(a.estimate == b.estimate);
        for (std::size_t k = 0; k < a.records.size(); ++k) {
            CHECK(a.records[k].fhat == b.records[k].fhat);
            CHECK(a.records[k].x == b.records[k].x);
        }
    }
}

TEST_CASE("single-source solver")
{
    const Problem tp = test::tangent_anchor_problem();
    const NodeSlice ts = make_slice(tp, 0, test::tangent_anchor_truth(), block_edge_weight);
    SolverOptions o;
    o.inner_max_iterations = 100000;
    const InnerResult r = solve_single_source(ts, 2.0, point2(-1, 3).col(0), o);
    CHECK(grad_slice(ts, r.z).norm() <= o.inner_epsilon_g);
    CHECK((r.z - test::tangent_anchor_truth().col(0)).norm() <= 2 * std::cbrt(o.inner_epsilon_g));

    const InnerResult axis = solve_single_source(ts, 2.0, point2(-1, 0).col(0), SolverOptions{});
    CHECK((axis.z - test::tangent_anchor_truth().col(0)).norm() <= 1e-6);

    // Already optimal.
    const InnerResult s = solve_single_source(ts, 2.0, test::tangent_anchor_truth().col(0), o);
    CHECK(s.iterations <= 1);
    CHECK(s.value == 0.0);
}

TEST_CASE("single-source solver matches a grid search")
{
    std::mt19937_64 rng(83);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Problem pr = test::random_problem(10, 700 + seed, 0.1);
        const Positions x = test::random_positions(2, 10, rng, 0, 1);
        const Index i = static_cast<Index>(seed);
        for (double w : {split_edge_weight, block_edge_weight}) {
            const NodeSlice s = make_slice(pr, i, x, w);
            SolverOptions o;
            o.inner_max_iterations = 5000;
            const InnerResult r = solve_single_source(s, lipschitz_fhat(pr), Point::Zero(2), o);
            const double grid = test::grid_polish_min_2d(
                [&](double a, double b) {
                    Point z(2);
                    z << a, b;
                    return eval_slice(s, z);
                },
                -1.0, 2.0);
            CHECK(std::abs(r.value - grid) <= 1e-6);
            CHECK(r.value == doctest::Approx(eval_slice(s, r.z)));
        }
    }
}

TEST_CASE("async-exact: single sensor reduces to the single-source solver")
{
    SolverOptions o = given(point2(-2, 5));
    o.max_iterations = 1;
    o.stop_rule = StopRule::fixed_iterations;
    const Problem tp = test::tangent_anchor_problem();
    const SolverTrace t = solve_async_exact(tp, ActivationSequence(1, 0), o);
    const NodeSlice s = make_slice(tp, 0, point2(-2, 5), o.slice_edge_weight);
    const InnerResult r = solve_single_source(s, lipschitz_fhat(tp), point2(-2, 5).col(0), o);
    CHECK(t.estimate.col(0) == r.z);
    CHECK(t.broadcasts[0] == 1);
}

TEST_CASE("async-exact: monotone cost and one broadcast per activation")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Problem pr = test::random_problem(10, 800 + seed);
        SolverOptions o;
        o.seed = seed;
        o.max_iterations = 2000;
        const SolverTrace t = solve_async_exact(pr, ActivationSequence(10, seed), o);
        double prev = t.initial.fhat;
        std::vector<std::int64_t> counted(10, 0);
        bool mono = true;
        for (const auto& r : t.records) {
            mono = mono && r.fhat <= prev;
            prev = r.fhat;
            ++counted[static_cast<std::size_t>(r.active)];
        }
        CHECK(mono);
        CHECK(counted == t.broadcasts);
        CHECK(t.records.back().broadcasts_per_sensor * 10 == doctest::Approx(static_cast<double>(t.iterations())));
    }
}

TEST_CASE("async-exact: random inner start still descends")
{
    const Problem pr = test::random_problem(10, 850);
    SolverOptions o;
    o.inner_warm_start = false;
    o.max_iterations = 500;
    const SolverTrace t = solve_async_exact(pr, ActivationSequence(10, 1), o);
    double prev = t.initial.fhat;
    for (const auto& r : t.records) {
        CHECK(r.fhat <= prev);
        prev = r.fhat;
    }

    // Non-uniform activation.
    std::vector<double> probs(10, 0.05);
    probs[0] = 0.55;
    o.inner_warm_start = true;
    CHECK_NOTHROW(solve_async_exact(pr, ActivationSequence(probs, 2), o));
    CHECK_THROWS_AS(solve_async_exact(pr, ActivationSequence(3, 2), o), Error);
}

TEST_CASE("async-inexact: single step on the single-anchor problem")
{
    SolverOptions o = given(point2(2, 0));
    const SolverTrace t = solve_async_inexact(test::single_anchor_problem(), o);
    REQUIRE(t.iterations() == 1);
    CHECK(t.estimate(0, 0) == doctest::Approx(1.0));
    CHECK(t.estimate(1, 0) == 0.0);
}

TEST_CASE("async-inexact: descent lemma at every step")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Problem pr = test::random_problem(10, 900 + seed);
        SolverOptions o;
        o.seed = seed;
        o.max_iterations = 3000;
        o.record_iterates = true;
        const SolverTrace t = solve_async_inexact(pr, o);
        Positions prev_x = initial_positions(pr, o);
        double prev_f = t.initial.fhat;
        int bad = 0;
        for (const auto& r : t.records) {
            const Point gi = grad_fhat(pr, prev_x).col(r.active);
            if (r.fhat > prev_f - gi.squaredNorm() / (2 * t.lipschitz) + 1e-12) ++bad;
            prev_x = r.x;
            prev_f = r.fhat;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("vanishing gradient on long runs")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Problem pr = test::random_problem(10, 950 + seed);
        SolverOptions o;
        o.seed = seed;
        o.stop_rule = StopRule::fixed_iterations;
        o.max_iterations = 100000;
        for (int s = 0; s < 2; ++s) {
            const SolverTrace t = s == 0 ? solve_parallel(pr, o) : solve_async_inexact(pr, o);
            double best = t.initial.grad_norm;
            for (const auto& r : t.records) best = std::min(best, r.grad_norm);
            CHECK(best <= 1e-4);
        }
    }
}

TEST_CASE("async-inexact: empirical O(1/k) decay")
{
    // Reference optimum per instance from a long parallel run.
    const int seeds = 32;
    const std::int64_t k = 400;
    double avg_k = 0, avg_2k = 0;
    for (int s = 0; s < seeds; ++s) {
        const Problem pr = test::random_problem(10, 1000 + static_cast<std::uint64_t>(s));
        SolverOptions ref;
        ref.stop_rule = StopRule::fixed_iterations;
        ref.max_iterations = 50000;
        ref.keep_trace = false;
        const double fstar = solve_parallel(pr, ref).final_fhat();

        SolverOptions o;
        o.seed = static_cast<std::uint64_t>(s);
        o.stop_rule = StopRule::fixed_iterations;
        o.max_iterations = 2 * k;
        const SolverTrace t = solve_async_inexact(pr, o);
        avg_k += (t.records[static_cast<std::size_t>(k - 1)].fhat - fstar) / seeds;
        avg_2k += (t.records.back().fhat - fstar) / seeds;
    }
    CHECK(avg_2k <= 0.75 * avg_k);
}

TEST_CASE("invalid problems are rejected before solving")
{
    const Problem pr(2, 2, {}, {}, Positions::Zero(2, 1), {{0, 0, 1.0}});
    CHECK_THROWS_AS(solve_parallel(pr, SolverOptions{}), Error);
    CHECK_THROWS_AS(solve_async_inexact(pr, SolverOptions{}), Error);
    CHECK_THROWS_AS(solve_async_exact(pr, ActivationSequence(2, 0), SolverOptions{}), Error);
}
