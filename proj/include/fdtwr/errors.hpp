#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace fdtwr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficientError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Why a constrained subproblem has no feasible point.
enum class InfeasibleCause {
    SinrGate,        // p_A |w_r^H h_AR|^2 <= Gamma_B: B's target unreachable at these powers
    NullSpaceBudget, // the ZF null space cannot deliver the B-link gain within the budget
    EmptyPolygon,    // no (p_A, p_B) in the box meets both linear constraints
    NoFeasibleAlpha, // every receive-combiner grid point failed
    Degenerate,      // collinear geometry with no room for a second direction
};

std::string_view to_string(InfeasibleCause cause);

struct Infeasible {
    InfeasibleCause cause;
};

/// Result of a solve that may legitimately have no feasible point.
/// Hard misuse (bad dimensions, invalid config) still throws.
template <typename T>
class Solved {
public:
    Solved(T value) : state_(std::move(value)) {}
    Solved(Infeasible why) : state_(why) {}

    bool feasible() const { return std::holds_alternative<T>(state_); }
    explicit operator bool() const { return feasible(); }

    const T& value() const& {
        if (!feasible()) {
            throw Error("infeasible result accessed: " + std::string(to_string(cause())));
        }
        return std::get<T>(state_);
    }
    T&& value() && {
        if (!feasible()) {
            throw Error("infeasible result accessed: " + std::string(to_string(cause())));
        }
        return std::get<T>(std::move(state_));
    }
    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

    InfeasibleCause cause() const { return std::get<Infeasible>(state_).cause; }

private:
    std::variant<T, Infeasible> state_;
};

} // namespace fdtwr
