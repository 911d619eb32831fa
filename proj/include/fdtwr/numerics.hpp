#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fdtwr {

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

namespace numerics {

/// Projector onto the column space of `x`. Throws RankDeficientError when the
/// smallest singular value is below 1e-12 of the largest.
CMat orth_projector(const CMat& x);

/// I - orth_projector(x).
CMat orth_complement_projector(const CMat& x);

/// Orthonormal basis N (M x (M-1)) of the vectors orthogonal to `v`, i.e.
/// v^H N = 0 and N^H N = I. Built from a Householder reflection; the phase of
/// each column is unspecified.
CMat null_space_basis(const CVec& v);

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending. Falls back to the
/// quadratic or linear formula when the leading coefficients vanish relative
/// to the largest one. Throws Error for the zero polynomial.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0);

struct Maximum {
    double x;
    double value;
};

/// Dense grid over [lo, hi] followed by golden-section refinement inside the
/// bracket around the best grid point. The returned value is never below any
/// grid value. `f` may return -inf to mark infeasible points.
Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                    int grid_points = 201);

/// Unit vector along `v`; throws DegenerateGeometryError when ||v|| < floor.
CVec normalized(const CVec& v, double floor = 1e-300);

} // namespace numerics
} // namespace fdtwr
