#pragma once
#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace locnet {

// Positions are stored column-wise: one column per node, one row per
// coordinate. Points never exceed three coordinates, so point temporaries
// stay on the stack.
inline constexpr int max_dim = 3;

template <class Scalar_>
using point_type = Eigen::Matrix<Scalar_, Eigen::Dynamic, 1, Eigen::ColMajor, max_dim, 1>;

template <class Scalar_>
using positions_type = Eigen::Matrix<Scalar_, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

using Index = Eigen::Index;
using Point = point_type<double>;
using Positions = positions_type<double>;
// One p-vector column per edge, in canonical edge order.
using EdgeVector = positions_type<double>;

enum class ErrorKind
{
    invalid_argument,
    disconnected_graph,
    no_anchor_link,
    malformed_measurement,
    generation_failure,
    numerical_divergence,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::disconnected_graph: return "disconnected-graph";
        case ErrorKind::no_anchor_link: return "no-anchor-link";
        case ErrorKind::malformed_measurement: return "malformed-measurement";
        case ErrorKind::generation_failure: return "generation-failure";
        case ErrorKind::numerical_divergence: return "numerical-divergence";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

} // namespace locnet
