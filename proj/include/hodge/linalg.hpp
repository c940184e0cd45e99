#pragma once

#include "hodge/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace hodge {

/// automatic: sparse Cholesky when the predicted factor fits `direct_factor_limit`, else
/// Jacobi-preconditioned conjugate gradients.
enum class SolverMethod { automatic, direct, cg };

struct SolverSettings {
    double tol = 1e-10;
    int max_iter = 20000;          // CG iterations; eigensolver restarts are capped at 300
    int refinement_steps = 8;      // iterative refinement for direct solves
    std::uint64_t seed = 20240521; // eigensolver start block
    double augmentation_alpha = 1e-3;
    double kernel_threshold = 1e-8;
    SolverMethod method = SolverMethod::automatic;
    double direct_factor_limit = 6e7; // nonzeros of the Cholesky factor
};

/// Regularization applied before a solve.
struct Regularization {
    std::string mode; // "none", "pin" or "augment"
    std::vector<Index> indices;
    std::vector<double> values;
};

struct SolveReport {
    std::string label;
    std::string method;
    int iterations = 0;
    double relative_residual = 0.0;
    Regularization regularization;
    double seconds = 0.0;
};

enum class PinMode { pin, augment };

/// Operator with its kernel removed: pinned rows/columns become identity rows, or the chosen
/// diagonal entries are increased by alpha * mean(diag L).
struct RegularizedOperator {
    SparseMatrix matrix;
    Regularization regularization;
    std::vector<std::uint8_t> pinned; // per row, pin mode only
};

/// Throws std::invalid_argument when `indices.size()` differs from `expected_kernel_dimension`.
RegularizedOperator pin_kernel(const SparseMatrix& L, const std::vector<Index>& indices,
                               PinMode mode, Index expected_kernel_dimension, double alpha = 1e-3);

///
/// Reusable solver for a symmetric positive semidefinite operator. The factorization is of
/// the regularized operator; reported residuals are against the original one.
///
class SpsdSolver {
public:
    SpsdSolver(const SparseMatrix& L, RegularizedOperator regularized,
               const SolverSettings& settings = {});
    explicit SpsdSolver(const SparseMatrix& L, const SolverSettings& settings = {});
    ~SpsdSolver();
    SpsdSolver(SpsdSolver&&) noexcept;
    SpsdSolver& operator=(SpsdSolver&&) noexcept;

    /// Throws SolverError when the residual contract is not met. The residual is relative to
    /// max(|b|, rhs_scale); pass the magnitude of b before cancellation when b may be tiny.
    Vector solve(const Vector& b, SolveReport* report = nullptr, double rhs_scale = 0.0) const;

    Index size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot solve of L x = b for b in the range of L (L nonsingular, or regularized inside).
std::pair<Vector, SolveReport> solve_spsd(const SparseMatrix& L, const Vector& b,
                                          const SolverSettings& settings = {});

struct EigenResult {
    Vector values;   // ascending
    Matrix vectors;  // S-orthonormal columns
    Index kernel_dimension = 0;
    bool all_below_threshold = false;
    int restarts = 0;
    double max_residual = 0.0;
};

///
/// The `count` smallest eigenpairs of L x = lambda S x (S diagonal positive), by block Krylov
/// iteration on (L + tau S)^-1 S with full S-reorthogonalization and Rayleigh-Ritz restarts.
///
/// kernel_dimension counts eigenvalues below settings.kernel_threshold times the largest
/// returned eigenvalue.
///
EigenResult smallest_eigs(const SparseMatrix& L, const Vector& S, Index count,
                          const SolverSettings& settings = {}, Index block_size = 0);

///
/// Factorized KKT system [[M, C^T], [C, 0]] with some primal unknowns pinned to zero.
///
/// `weak` lists primal indices on which M carries no weight (M has zero rows there). The
/// factorization is of a regularized quasi-definite system, reduced to its SPD primal Schur
/// complement; solves are refined against the exact system.
///
class SaddleSolver {
public:
    SaddleSolver(const SparseMatrix& M, const SparseMatrix& C, const std::vector<Index>& pins,
                 const std::vector<Index>& weak = {}, const SolverSettings& settings = {});
    ~SaddleSolver();
    SaddleSolver(SaddleSolver&&) noexcept;
    SaddleSolver& operator=(SaddleSolver&&) noexcept;

    struct Solution {
        Vector primal;
        Vector multipliers;
        SolveReport report;
    };

    /// Minimizes 1/2 a^T M a - f^T a subject to C a = 0 and the pins.
    Solution solve(const Vector& f) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SaddleSolver::Solution solve_saddle(const SparseMatrix& M, const SparseMatrix& C,
                                    const Vector& f, const std::vector<Index>& pins = {},
                                    const SolverSettings& settings = {});

struct GramSchmidtResult {
    Matrix basis;              // S-orthonormal columns
    std::vector<Index> dropped; // input columns lost to numerical rank deficiency
};

/// Modified Gram-Schmidt in the diagonal S inner product, with one reorthogonalization pass.
template <typename Derived>
GramSchmidtResult gram_schmidt_S(const Eigen::MatrixBase<Derived>& vectors, const Vector& S,
                                 double drop_tolerance = 1e-10)
{
    using Scalar = typename Derived::Scalar;
    const Index n = vectors.rows();
    if (S.size() != n) throw std::invalid_argument("gram_schmidt_S: size mismatch");
    auto inner = [&](const auto& a, const auto& b) { return (a.array() * S.array() * b.array()).sum(); };
    GramSchmidtResult out;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q(n, vectors.cols());
    Index kept = 0;
    double first = -1.0;
    for (Index j = 0; j < vectors.cols(); ++j) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = vectors.col(j);
        const double original = std::sqrt(inner(v, v));
        if (first < 0.0) first = original;
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < kept; ++i) v -= inner(q.col(i), v) * q.col(i);
        }
        const double norm = std::sqrt(inner(v, v));
        if (!(norm > drop_tolerance * first) || norm == 0.0) {
            out.dropped.push_back(j);
            continue;
        }
        q.col(kept++) = v / norm;
    }
    out.basis = q.leftCols(kept).template cast<double>();
    return out;
}

} // namespace hodge
