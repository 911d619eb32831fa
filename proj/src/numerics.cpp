#include "fdtwr/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "fdtwr/errors.hpp"

namespace fdtwr {

std::string_view to_string(InfeasibleCause cause) {
    switch (cause) {
    case InfeasibleCause::SinrGate: return "sinr-gate";
    case InfeasibleCause::NullSpaceBudget: return "null-space-budget";
    case InfeasibleCause::EmptyPolygon: return "empty-polygon";
    case InfeasibleCause::NoFeasibleAlpha: return "no-feasible-alpha";
    case InfeasibleCause::Degenerate: return "degenerate";
    }
    return "unknown";
}

namespace numerics {

namespace {

void require_full_column_rank(const CMat& x) {
    if (x.cols() == 0 || x.rows() < x.cols()) {
        throw RankDeficientError("orth_projector: need a tall matrix with at least one column");
    }
    Eigen::JacobiSVD<CMat> svd(x);
    const auto& s = svd.singularValues();
    const double largest = s(0);
    const double smallest = s(s.size() - 1);
    if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
        throw RankDeficientError("orth_projector: columns are linearly dependent");
    }
}

double poly_eval(const std::array<double, 4>& c, double x) {
    return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

double poly_deriv(const std::array<double, 4>& c, double x) {
    return (3.0 * c[3] * x + 2.0 * c[2]) * x + c[1];
}

// A few Newton steps; keeps the iterate with the smallest residual.
double polish(const std::array<double, 4>& c, double x) {
    double best = x;
    double best_res = std::abs(poly_eval(c, x));
    for (int i = 0; i < 8 && best_res > 0.0; ++i) {
        const double d = poly_deriv(c, x);
        if (d == 0.0) {
            break;
        }
        x -= poly_eval(c, x) / d;
        const double res = std::abs(poly_eval(c, x));
        if (res < best_res) {
            best = x;
            best_res = res;
        } else {
            break;
        }
    }
    return best;
}

std::vector<double> quadratic_roots(double a, double b, double c) {
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        // Tangent double root lost to rounding still counts when it is tiny.
        if (disc > -1e-12 * std::max(b * b, std::abs(4.0 * a * c))) {
            return {-b / (2.0 * a)};
        }
        return {};
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) {
        return {0.0};
    }
    return {q / a, c / q};
}

} // namespace

CMat orth_projector(const CMat& x) {
    require_full_column_rank(x);
    Eigen::HouseholderQR<CMat> qr(x);
    const CMat q = qr.householderQ() * CMat::Identity(x.rows(), x.cols());
    return q * q.adjoint();
}

CMat orth_complement_projector(const CMat& x) {
    return CMat::Identity(x.rows(), x.rows()) - orth_projector(x);
}

CMat null_space_basis(const CVec& v) {
    const auto m = v.size();
    if (m < 2) {
        throw DimensionError("null_space_basis: need a vector of length >= 2");
    }
    if (v.norm() == 0.0) {
        throw DegenerateGeometryError("null_space_basis: zero vector");
    }
    // The first Householder column is parallel to v; the rest span its complement.
    const Eigen::HouseholderQR<CMat> qr{CMat(v)};
    const CMat q = qr.householderQ() * CMat::Identity(m, m);
    return q.rightCols(m - 1);
}

std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    if (scale == 0.0 || !std::isfinite(scale)) {
        throw Error("real_cubic_roots: polynomial is identically zero or non-finite");
    }
    const std::array<double, 4> c{c0 / scale, c1 / scale, c2 / scale, c3 / scale};
    constexpr double kNegligible = 1e-12;

    std::vector<double> roots;
    if (std::abs(c[3]) > kNegligible) {
        Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
        companion(0, 0) = -c[2] / c[3];
        companion(0, 1) = -c[1] / c[3];
        companion(0, 2) = -c[0] / c[3];
        companion(1, 0) = 1.0;
        companion(2, 1) = 1.0;
        Eigen::EigenSolver<Eigen::Matrix3d> eig(companion, false);
        for (const auto& z : eig.eigenvalues()) {
            const double mag = std::max(1.0, std::abs(z));
            if (std::abs(z.imag()) <= 1e-8 * mag) {
                roots.push_back(polish(c, z.real()));
            } else if (std::abs(z.imag()) <= 1e-5 * mag) {
                // Near-double root split into a complex pair by rounding.
                const double x = polish(c, z.real());
                if (std::abs(poly_eval(c, x)) <= 1e-10) {
                    roots.push_back(x);
                }
            }
        }
    } else if (std::abs(c[2]) > kNegligible) {
        for (double x : quadratic_roots(c[2], c[1], c[0])) {
            roots.push_back(polish(c, x));
        }
    } else if (std::abs(c[1]) > kNegligible) {
        roots.push_back(polish(c, -c[0] / c[1]));
    }

    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double x : roots) {
        if (unique.empty() || std::abs(x - unique.back()) > 1e-9 * std::max(1.0, std::abs(x))) {
            unique.push_back(x);
        }
    }
    return unique;
}

Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                    int grid_points) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw Error("maximize_1d: empty interval");
    }
    if (lo == hi) {
        return {lo, f(lo)};
    }
    const int n = std::max(grid_points, 3);
    const double step = (hi - lo) / (n - 1);

    Maximum best{lo, -std::numeric_limits<double>::infinity()};
    int best_index = 0;
    for (int i = 0; i < n; ++i) {
        const double x = (i == n - 1) ? hi : lo + i * step;
        const double v = f(x);
        if (i == 0 || v > best.value) {
            best = {x, v};
            best_index = i;
        }
    }
    if (!std::isfinite(best.value)) {
        return best;
    }

    double a = lo + std::max(best_index - 1, 0) * step;
    double b = std::min(hi, lo + std::min(best_index + 1, n - 1) * step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 200 && b - a > tol; ++iter) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if (f1 > best.value) {
        best = {x1, f1};
    }
    if (f2 > best.value) {
        best = {x2, f2};
    }
    return best;
}

CVec normalized(const CVec& v, double floor) {
    const double n = v.norm();
    if (!(n >= floor) || n == 0.0) {
        throw DegenerateGeometryError("normalized: vector norm below floor");
    }
    return v / n;
}

} // namespace numerics
} // namespace fdtwr
