#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hodge {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Fixed-capacity multi-index; unused trailing axes stay 0.
using MultiIndex = std::array<Index, 3>;

/// Point in the grid's embedding space; the third coordinate is 0 in 2D.
using Point = Eigen::Vector3d;

/// Boundary condition a support or operator family belongs to.
enum class SupportKind { normal, tangential, extended0 };

inline const char* to_string(SupportKind kind)
{
    switch (kind) {
    case SupportKind::normal: return "normal";
    case SupportKind::tangential: return "tangential";
    case SupportKind::extended0: return "extended0";
    }
    return "?";
}

/// Raised when a linear solve or eigen iteration does not meet its contract.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when computed kernel dimensions disagree with the Betti numbers.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hodge
