#include <locnet/solvers.hpp>
#include <locnet/geometry.hpp>
#include <locnet/seed.hpp>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace locnet {

const char* to_string(StopRule rule) noexcept
{
    switch (rule) {
        case StopRule::gradient_norm: return "gradient-norm";
        case StopRule::relative_improvement: return "relative-improvement";
        case StopRule::fixed_iterations: return "fixed-iterations";
    }
    return "unknown";
}

const char* to_string(Termination t) noexcept
{
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::budget_exhausted: return "budget-exhausted";
        case Termination::completed: return "completed";
    }
    return "unknown";
}

StopRule parse_stop_rule(const std::string& name)
{
    if (name == "gradient-norm") return StopRule::gradient_norm;
    if (name == "relative-improvement") return StopRule::relative_improvement;
    if (name == "fixed-iterations") return StopRule::fixed_iterations;
    throw Error(ErrorKind::invalid_argument, "unknown stop rule '" + name + "'");
}

void check_options(const SolverOptions& opts)
{
    if (opts.max_iterations < 1) throw Error(ErrorKind::invalid_argument, "max_iterations must be at least 1");
    if (opts.inner_max_iterations < 1) throw Error(ErrorKind::invalid_argument, "inner_max_iterations must be at least 1");
    if (!(opts.epsilon_g > 0) || !(opts.epsilon_r > 0) || !(opts.inner_epsilon_g > 0)) {
        throw Error(ErrorKind::invalid_argument, "tolerances must be positive");
    }
    if (!(opts.slice_edge_weight > 0)) throw Error(ErrorKind::invalid_argument, "slice edge weight must be positive");
    if (!(opts.proximal_weight >= 0)) throw Error(ErrorKind::invalid_argument, "proximal weight must be nonnegative");
    if (opts.init_rule == InitRule::given && !opts.initial) {
        throw Error(ErrorKind::invalid_argument, "init rule 'given' requires initial positions");
    }
}

ActivationSequence::ActivationSequence(Index n, std::uint64_t seed)
    : probs_(static_cast<std::size_t>(std::max<Index>(n, 0)), n > 0 ? 1.0 / static_cast<double>(n) : 0.0),
      uniform_(true), rng_(seed), pick_uniform_(0, std::max<Index>(n - 1, 0))
{
    if (n < 1) throw Error(ErrorKind::invalid_argument, "activation needs at least one sensor");
}

ActivationSequence::ActivationSequence(std::vector<double> probabilities, std::uint64_t seed)
    : probs_(std::move(probabilities)), uniform_(false), rng_(seed)
{
    if (probs_.empty()) throw Error(ErrorKind::invalid_argument, "activation needs at least one sensor");
    double total = 0;
    for (double p : probs_) {
        if (!(p > 0) || !std::isfinite(p)) {
            throw Error(ErrorKind::invalid_argument, "activation probabilities must be positive");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::invalid_argument, "activation probabilities must sum to 1");
    pick_weighted_ = std::discrete_distribution<Index>(probs_.begin(), probs_.end());
}

Index ActivationSequence::next()
{
    return uniform_ ? pick_uniform_(rng_) : pick_weighted_(rng_);
}

double nesterov_weight(std::int64_t k)
{
    if (k < 1) throw Error(ErrorKind::invalid_argument, "extrapolation weight needs k >= 1");
    return static_cast<double>(k - 2) / static_cast<double>(k + 1);
}

Positions initial_positions(const Problem& problem, const SolverOptions& opts)
{
    if (opts.init_rule == InitRule::given) {
        if (!opts.initial) throw Error(ErrorKind::invalid_argument, "no initial positions given");
        const Positions& x0 = *opts.initial;
        if (x0.rows() != problem.p() || x0.cols() != problem.n()) {
            throw Error(ErrorKind::invalid_argument, "initial positions do not match the problem shape");
        }
        if (!x0.allFinite()) throw Error(ErrorKind::invalid_argument, "initial positions must be finite");
        return x0;
    }
    std::mt19937_64 rng(derive_seed(opts.seed, {stream::init}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Positions x(problem.p(), problem.n());
    for (Index i = 0; i < problem.n(); ++i) {
        for (Index d = 0; d < problem.p(); ++d) x(d, i) = unif(rng);
    }
    return x;
}

namespace {

// Shared iteration bookkeeping for the three solvers.
class TraceBuilder
{
public:
    TraceBuilder(const Problem& problem, const SolverOptions& opts, const Positions& x0)
        : problem_(problem), opts_(opts)
    {
        trace_.lipschitz = lipschitz_fhat(problem);
        trace_.broadcasts.assign(static_cast<std::size_t>(problem.n()), 0);
        trace_.initial = make_record(0, x0, -1);
        last_fhat_ = trace_.initial.fhat;
        history_.push_back(last_fhat_);
        if (opts.keep_trace) trace_.records.reserve(static_cast<std::size_t>(std::min<std::int64_t>(opts.max_iterations, 1 << 20)));
    }

    double lipschitz() const { return trace_.lipschitz; }
    bool initial_converged() const { return trace_.initial.grad_norm <= opts_.epsilon_g; }
    double last_fhat() const { return last_fhat_; }

    void broadcast(Index i) { ++trace_.broadcasts[static_cast<std::size_t>(i)]; ++total_broadcasts_; }
    void broadcast_all()
    {
        for (auto& b : trace_.broadcasts) ++b;
        total_broadcasts_ += problem_.n();
    }

    /// Records iteration k and reports whether the stop rule fired. `window`
    /// is the lag used by the relative-improvement rule.
    bool record(std::int64_t k, const Positions& x, Index active, std::int64_t window)
    {
        if (!x.allFinite()) {
            throw Error(ErrorKind::numerical_divergence, "non-finite iterate at k = " + std::to_string(k));
        }
        IterationRecord rec = make_record(k, x, active);
        last_fhat_ = rec.fhat;
        bool stop = false;
        switch (opts_.stop_rule) {
            case StopRule::gradient_norm:
                stop = rec.grad_norm <= opts_.epsilon_g;
                break;
            case StopRule::relative_improvement: {
                history_.push_back(rec.fhat);
                if (static_cast<std::int64_t>(history_.size()) > window) {
                    const double before = history_[history_.size() - 1 - static_cast<std::size_t>(window)];
                    stop = std::abs(before - rec.fhat) <= opts_.epsilon_r * std::abs(before);
                    history_.pop_front();
                }
                break;
            }
            case StopRule::fixed_iterations:
                break;
        }
        if (opts_.keep_trace) {
            trace_.records.push_back(std::move(rec));
        } else {
            if (trace_.records.empty()) trace_.records.push_back(std::move(rec));
            else trace_.records.back() = std::move(rec);
        }
        return stop;
    }

    SolverTrace finish(const Positions& x, bool converged)
    {
        trace_.estimate = x;
        if (converged) trace_.termination = Termination::converged;
        else if (opts_.stop_rule == StopRule::fixed_iterations) trace_.termination = Termination::completed;
        else trace_.termination = Termination::budget_exhausted;
        return std::move(trace_);
    }

private:
    IterationRecord make_record(std::int64_t k, const Positions& x, Index active)
    {
        IterationRecord rec;
        rec.k = k;
        rec.fhat = fhat_value(problem_, x);
        grad_fhat_nodewise(problem_, x, grad_);
        rec.grad_norm = grad_.norm();
        rec.broadcasts_per_sensor = static_cast<double>(total_broadcasts_) / static_cast<double>(problem_.n());
        rec.active = active;
        if (opts_.record_iterates) rec.x = x;
        return rec;
    }

    const Problem& problem_;
    const SolverOptions& opts_;
    SolverTrace trace_;
    Positions grad_;
    std::int64_t total_broadcasts_ = 0;
    double last_fhat_ = 0;
    std::deque<double> history_;
};

} // namespace

SolverTrace solve_parallel(const Problem& problem, const SolverOptions& opts)
{
    validate(problem);
    check_options(opts);
    Positions x = initial_positions(problem, opts);
    Positions x_prev = x; // x(-1) = x(0)
    TraceBuilder tb(problem, opts, x);
    const double step = 1.0 / tb.lipschitz();

    if (opts.stop_rule == StopRule::gradient_norm && tb.initial_converged()) {
        return tb.finish(x, true);
    }

    Positions w(problem.p(), problem.n());
    Positions g(problem.p(), problem.n());
    bool converged = false;
    for (std::int64_t k = 1; k <= opts.max_iterations; ++k) {
        w = x + nesterov_weight(k) * (x - x_prev);
        tb.broadcast_all();
        grad_fhat_nodewise(problem, w, g);
        x_prev.swap(x);
        x = w - step * g;
        if (tb.record(k, x, -1, 1)) {
            converged = true;
            break;
        }
    }
    return tb.finish(x, converged);
}

InnerResult solve_single_source(const NodeSlice& slice, double lipschitz, const Point& start,
                                const SolverOptions& opts, const Point* prox_center)
{
    if (!(lipschitz > 0)) throw Error(ErrorKind::invalid_argument, "inner Lipschitz constant must be positive");
    if (start.size() != slice.dim()) throw Error(ErrorKind::invalid_argument, "inner start has the wrong dimension");
    const double mu = prox_center ? opts.proximal_weight : 0.0;
    const double step = 1.0 / (lipschitz + mu);

    auto value = [&](const Point& z) {
        double v = eval_slice(slice, z);
        if (mu > 0) v += 0.5 * mu * (z - *prox_center).squaredNorm();
        return v;
    };
    auto gradient = [&](const Point& z) {
        Point g = grad_slice(slice, z);
        if (mu > 0) g += mu * (z - *prox_center);
        return g;
    };

    InnerResult best{start, 0, value(start)};
    if (gradient(start).norm() <= opts.inner_epsilon_g) return best;

    Point z = start;
    Point z_prev = start;
    for (std::int64_t l = 1; l <= opts.inner_max_iterations; ++l) {
        const Point w = z + nesterov_weight(l) * (z - z_prev);
        z_prev = z;
        z = w - step * gradient(w);
        const double v = value(z);
        if (v < best.value) {
            best.z = z;
            best.value = v;
        }
        best.iterations = l;
        if (gradient(z).norm() <= opts.inner_epsilon_g) {
            best.z = z;
            best.value = v;
            break;
        }
    }
    return best;
}

SolverTrace solve_async_exact(const Problem& problem, ActivationSequence activation, const SolverOptions& opts)
{
    validate(problem);
    check_options(opts);
    if (activation.size() != problem.n()) {
        throw Error(ErrorKind::invalid_argument, "activation sequence size does not match the sensor count");
    }
    Positions x = initial_positions(problem, opts);
    TraceBuilder tb(problem, opts, x);
    const double lipschitz = tb.lipschitz();
    std::mt19937_64 inner_rng(derive_seed(opts.seed, {stream::inner}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (opts.stop_rule == StopRule::gradient_norm && tb.initial_converged()) {
        return tb.finish(x, true);
    }

    bool converged = false;
    Positions candidate = x;
    for (std::int64_t k = 1; k <= opts.max_iterations; ++k) {
        const Index i = activation.next();
        const NodeSlice slice = make_slice(problem, i, x, opts.slice_edge_weight);
        Point start = x.col(i);
        if (!opts.inner_warm_start) {
            for (Index d = 0; d < problem.p(); ++d) start(d) = unif(inner_rng);
        }
        const Point current = x.col(i);
        const InnerResult inner = solve_single_source(
            slice, lipschitz, start, opts, opts.proximal_weight > 0 ? &current : nullptr);
        candidate.col(i) = inner.z;
        // Keep the old block if the inexact inner solve made things worse.
        if (fhat_value(problem, candidate) <= tb.last_fhat()) {
            x.col(i) = inner.z;
        } else {
            candidate.col(i) = x.col(i);
        }
        tb.broadcast(i);
        if (tb.record(k, x, i, problem.n())) {
            converged = true;
            break;
        }
    }
    return tb.finish(x, converged);
}

SolverTrace solve_async_inexact(const Problem& problem, const SolverOptions& opts)
{
    validate(problem);
    check_options(opts);
    ActivationSequence activation(problem.n(), derive_seed(opts.seed, {stream::activation}));
    Positions x = initial_positions(problem, opts);
    TraceBuilder tb(problem, opts, x);
    const double step = 1.0 / tb.lipschitz();

    if (opts.stop_rule == StopRule::gradient_norm && tb.initial_converged()) {
        return tb.finish(x, true);
    }

    bool converged = false;
    for (std::int64_t k = 1; k <= opts.max_iterations; ++k) {
        const Index i = activation.next();
        const Point g = grad_fhat_node(problem, x, i);
        x.col(i) -= step * g;
        tb.broadcast(i);
        if (tb.record(k, x, i, problem.n())) {
            converged = true;
            break;
        }
    }
    return tb.finish(x, converged);
}

} // namespace locnet
