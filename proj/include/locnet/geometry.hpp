#pragma once
#include <locnet/types.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace locnet {

/// Closed Euclidean ball { y : ||y - center|| <= radius }.
template <class Scalar_>
struct Ball
{
    using scalar_t = Scalar_;
    using point_t = point_type<Scalar_>;

    point_t center;
    scalar_t radius = 0;

    Ball() = default;

    template <class Derived>
    Ball(const Eigen::MatrixBase<Derived>& c, scalar_t r)
        : radius(r)
    {
        if (c.size() < 1 || c.size() > max_dim) {
            throw Error(ErrorKind::invalid_argument, "ball dimension must be 1, 2 or 3");
        }
        center = c;
        if (!(r >= 0) || !std::isfinite(r)) {
            throw Error(ErrorKind::invalid_argument, "ball radius must be finite and nonnegative");
        }
        if (!center.allFinite()) {
            throw Error(ErrorKind::invalid_argument, "ball center must be finite");
        }
    }

    Index dim() const { return center.size(); }
};

namespace detail {

template <class Derived, class Scalar_>
void check_dims(const Eigen::MatrixBase<Derived>& z, const Ball<Scalar_>& b)
{
    if (z.size() != b.dim()) {
        throw Error(ErrorKind::invalid_argument,
            "point has dimension " + std::to_string(z.size()) +
            " but ball has dimension " + std::to_string(b.dim()));
    }
}

} // namespace detail

// The kernels below come in two flavors: an unchecked (center, radius)
// form used on hot paths, and a checked Ball form for the public surface.

template <class DerivedZ, class DerivedC>
point_type<typename DerivedZ::Scalar> project_ball(
    const Eigen::MatrixBase<DerivedZ>& z,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedZ::Scalar radius)
{
    using point_t = point_type<typename DerivedZ::Scalar>;
    const point_t diff = z - center;
    const auto dist = diff.norm();
    if (dist <= radius) return z;
    return center + (radius / dist) * diff;
}

/// Gradient of half the squared distance to the ball: z - P(z).
template <class DerivedZ, class DerivedC>
point_type<typename DerivedZ::Scalar> grad_phi_ball(
    const Eigen::MatrixBase<DerivedZ>& z,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedZ::Scalar radius)
{
    using point_t = point_type<typename DerivedZ::Scalar>;
    const point_t diff = z - center;
    const auto dist = diff.norm();
    if (dist <= radius) return point_t::Zero(z.size());
    return diff - (radius / dist) * diff;
}

template <class DerivedZ, class DerivedC>
typename DerivedZ::Scalar phi_ball(
    const Eigen::MatrixBase<DerivedZ>& z,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedZ::Scalar radius)
{
    using scalar_t = typename DerivedZ::Scalar;
    const scalar_t excess = std::max<scalar_t>(scalar_t(0), (z - center).norm() - radius);
    return scalar_t(0.5) * excess * excess;
}

template <class DerivedZ, class DerivedC>
typename DerivedZ::Scalar phi_sphere(
    const Eigen::MatrixBase<DerivedZ>& z,
    const Eigen::MatrixBase<DerivedC>& center,
    typename DerivedZ::Scalar radius)
{
    using scalar_t = typename DerivedZ::Scalar;
    const scalar_t gap = (z - center).norm() - radius;
    return scalar_t(0.5) * gap * gap;
}

template <class Derived>
point_type<typename Derived::Scalar> project_ball(
    const Eigen::MatrixBase<Derived>& z, const Ball<typename Derived::Scalar>& b)
{
    detail::check_dims(z, b);
    return project_ball(z, b.center, b.radius);
}

template <class Derived>
point_type<typename Derived::Scalar> grad_phi_ball(
    const Eigen::MatrixBase<Derived>& z, const Ball<typename Derived::Scalar>& b)
{
    detail::check_dims(z, b);
    return grad_phi_ball(z, b.center, b.radius);
}

/// Half the squared distance from z to the ball (zero inside).
template <class Derived>
typename Derived::Scalar phi_ball(
    const Eigen::MatrixBase<Derived>& z, const Ball<typename Derived::Scalar>& b)
{
    detail::check_dims(z, b);
    return phi_ball(z, b.center, b.radius);
}

/// Half the squared distance from z to the boundary sphere of the ball.
template <class Derived>
typename Derived::Scalar phi_sphere(
    const Eigen::MatrixBase<Derived>& z, const Ball<typename Derived::Scalar>& b)
{
    detail::check_dims(z, b);
    return phi_sphere(z, b.center, b.radius);
}

} // namespace locnet
