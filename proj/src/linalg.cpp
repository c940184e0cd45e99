#include "hodge/linalg.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace hodge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector diagonal_of(const SparseMatrix& a)
{
    Vector d = Vector::Zero(std::min(a.rows(), a.cols()));
    for (Index c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            if (it.row() == it.col()) d[c] += it.value();
        }
    }
    return d;
}

} // namespace

RegularizedOperator pin_kernel(const SparseMatrix& L, const std::vector<Index>& indices,
                               PinMode mode, Index expected_kernel_dimension, double alpha)
{
    if (static_cast<Index>(indices.size()) != expected_kernel_dimension) {
        throw std::invalid_argument("pin_kernel: " + std::to_string(indices.size()) +
                                    " regularized indices for a kernel of dimension " +
                                    std::to_string(expected_kernel_dimension));
    }
    for (Index i : indices) {
        if (i < 0 || i >= L.rows()) throw std::invalid_argument("pin_kernel: index out of range");
    }
    RegularizedOperator out;
    out.regularization.indices = indices;
    if (indices.empty()) {
        out.matrix = L;
        out.regularization.mode = "none";
        return out;
    }
    if (mode == PinMode::augment) {
        const double shift = alpha * diagonal_of(L).mean();
        out.regularization.mode = "augment";
        out.matrix = L;
        for (Index i : indices) {
            out.matrix.coeffRef(i, i) += shift;
            out.regularization.values.push_back(shift);
        }
        out.matrix.makeCompressed();
        return out;
    }
    out.regularization.mode = "pin";
    out.pinned.assign(static_cast<std::size_t>(L.rows()), 0);
    for (Index i : indices) out.pinned[i] = 1;
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(L.nonZeros()));
    for (Index c = 0; c < L.outerSize(); ++c) {
        if (out.pinned[c]) continue;
        for (SparseMatrix::InnerIterator it(L, c); it; ++it) {
            if (!out.pinned[it.row()]) entries.emplace_back(it.row(), c, it.value());
        }
    }
    for (Index i : indices) {
        entries.emplace_back(i, i, 1.0);
        out.regularization.values.push_back(0.0);
    }
    out.matrix.resize(L.rows(), L.cols());
    out.matrix.setFromTriplets(entries.begin(), entries.end());
    return out;
}

// ---------------------------------------------------------------------------------------

struct SpsdSolver::Impl {
    SparseMatrix original;
    RegularizedOperator reg;
    SolverSettings settings;
    Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> cholesky;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    bool direct = true;
    double factor_seconds = 0.0;

    Impl(const SparseMatrix& L, RegularizedOperator r, const SolverSettings& s)
        : original(L), reg(std::move(r)), settings(s)
    {
        if (L.rows() != L.cols()) throw std::invalid_argument("SpsdSolver: matrix is not square");
        const auto start = Clock::now();
        direct = settings.method != SolverMethod::cg;
        if (direct) {
            cholesky.analyzePattern(reg.matrix);
            if (settings.method == SolverMethod::automatic &&
                cholesky.cholmod().lnz > settings.direct_factor_limit) {
                direct = false;
            }
        }
        if (direct) {
            cholesky.factorize(reg.matrix);
            if (cholesky.info() != Eigen::Success) {
                throw SolverError("Cholesky factorization failed: operator is not positive "
                                  "definite after regularization");
            }
        } else {
            cg.setTolerance(settings.tol * 1e-2);
            cg.setMaxIterations(settings.max_iter);
            cg.compute(reg.matrix);
        }
        factor_seconds = seconds_since(start);
    }
};

SpsdSolver::SpsdSolver(const SparseMatrix& L, RegularizedOperator regularized,
                       const SolverSettings& settings)
    : impl_(std::make_unique<Impl>(L, std::move(regularized), settings))
{
}

SpsdSolver::SpsdSolver(const SparseMatrix& L, const SolverSettings& settings)
    : SpsdSolver(L, pin_kernel(L, {}, PinMode::pin, 0), settings)
{
}

SpsdSolver::~SpsdSolver() = default;
SpsdSolver::SpsdSolver(SpsdSolver&&) noexcept = default;
SpsdSolver& SpsdSolver::operator=(SpsdSolver&&) noexcept = default;

Index SpsdSolver::size() const { return impl_->original.rows(); }

Vector SpsdSolver::solve(const Vector& b, SolveReport* report, double rhs_scale) const
{
    const Impl& s = *impl_;
    if (b.size() != s.original.rows()) throw std::invalid_argument("SpsdSolver: rhs size mismatch");
    const auto start = Clock::now();
    SolveReport rep;
    rep.method = s.direct ? "cholmod-llt" : "pcg-jacobi";
    rep.regularization = s.reg.regularization;

    Vector rhs = b;
    for (std::size_t i = 0; i < s.reg.pinned.size(); ++i) {
        if (s.reg.pinned[i]) rhs[static_cast<Index>(i)] = 0.0;
    }
    const double bnorm = b.norm();
    Vector x = Vector::Zero(b.size());
    if (bnorm == 0.0) {
        rep.seconds = seconds_since(start);
        if (report) *report = rep;
        return x;
    }
    if (s.direct) {
        x = s.cholesky.solve(rhs);
        for (int step = 0; step < s.settings.refinement_steps; ++step) {
            const Vector r = rhs - s.reg.matrix * x;
            ++rep.iterations;
            if (r.norm() <= 1e-3 * s.settings.tol * rhs.norm()) break;
            x += s.cholesky.solve(r);
        }
    } else {
        x = s.cg.solve(rhs);
        rep.iterations = static_cast<int>(s.cg.iterations());
    }
    rep.relative_residual = (s.original * x - b).norm() / std::max(bnorm, rhs_scale);
    rep.seconds = seconds_since(start);
    if (report) *report = rep;
    if (!(rep.relative_residual <= s.settings.tol)) {
        throw SolverError("solve did not reach tolerance: relative residual " +
                          std::to_string(rep.relative_residual) + " (right-hand side may have a "
                          "component in the kernel)");
    }
    return x;
}

std::pair<Vector, SolveReport> solve_spsd(const SparseMatrix& L, const Vector& b,
                                          const SolverSettings& settings)
{
    SpsdSolver solver(L, settings);
    SolveReport report;
    Vector x = solver.solve(b, &report);
    return {std::move(x), report};
}

// ---------------------------------------------------------------------------------------

namespace {

// In-place S-orthonormalization of the columns of z against `basis` and each other.
// Returns the number of columns kept (moved to the front).
Index orthonormalize_block(const Matrix& basis, Index basis_cols, Matrix& z, const Vector& S)
{
    Index kept = 0;
    for (Index j = 0; j < z.cols(); ++j) {
        Vector v = z.col(j);
        const double before = std::sqrt(v.dot(S.cwiseProduct(v)));
        if (before == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            if (basis_cols > 0) {
                const auto b = basis.leftCols(basis_cols);
                v -= b * (b.transpose() * S.cwiseProduct(v));
            }
            for (Index i = 0; i < kept; ++i) v -= z.col(i).dot(S.cwiseProduct(v)) * z.col(i);
        }
        const double after = std::sqrt(v.dot(S.cwiseProduct(v)));
        if (!(after > 1e-10 * before)) continue;
        z.col(kept++) = v / after;
    }
    return kept;
}

EigenResult dense_eigs(const SparseMatrix& L, const Vector& S, Index count)
{
    const Vector w = S.cwiseSqrt().cwiseInverse();
    const Matrix a = w.asDiagonal() * Matrix(L) * w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()));
    if (eig.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
    EigenResult out;
    out.values = eig.eigenvalues().head(count);
    out.vectors = w.asDiagonal() * eig.eigenvectors().leftCols(count);
    return out;
}

} // namespace

EigenResult smallest_eigs(const SparseMatrix& L, const Vector& S, Index count,
                          const SolverSettings& settings, Index block_size)
{
    const Index n = L.rows();
    if (L.cols() != n || S.size() != n) throw std::invalid_argument("smallest_eigs: size mismatch");
    if (count < 1 || count > n) {
        throw std::invalid_argument("smallest_eigs: count " + std::to_string(count) +
                                    " outside [1, " + std::to_string(n) + "]");
    }
    if (!(S.array() > 0.0).all()) throw std::invalid_argument("smallest_eigs: S must be positive");

    // Gershgorin bound on the pencil spectrum
    Vector rowsum = Vector::Zero(n);
    double trace = 0.0;
    for (Index c = 0; c < L.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(L, c); it; ++it) {
            rowsum[it.row()] += std::abs(it.value());
            if (it.row() == c) trace += it.value();
        }
    }
    const double lambda_max = rowsum.cwiseQuotient(S).maxCoeff();

    EigenResult out;
    const Index b = block_size > 0 ? block_size : 6;
    const Index keep = std::min(n, count + b);
    const Index steps = 3;
    if (n <= 400 || keep * (steps + 1) >= n) {
        out = dense_eigs(L, S, count);
    } else {
        const double tau = 1e-5 * trace / S.sum();
        const SparseMatrix shifted = L + SparseMatrix(S.asDiagonal() * tau);
        Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> factor(shifted);
        if (factor.info() != Eigen::Success) throw SolverError("shift-invert factorization failed");

        std::mt19937_64 rng(settings.seed);
        std::normal_distribution<double> gauss;
        Matrix basis(n, keep * (steps + 1));
        Matrix start(n, keep);
        for (Index j = 0; j < keep; ++j)
            for (Index i = 0; i < n; ++i) start(i, j) = gauss(rng);

        const double tol = std::min(settings.tol, 1e-8) * lambda_max;
        std::vector<std::uint8_t> converged;
        Vector ritz;
        Matrix ritz_vectors;
        const int max_cycles = std::max(1, std::min(settings.max_iter, 300));
        bool done = false;
        for (int cycle = 0; cycle < max_cycles && !done; ++cycle) {
            out.restarts = cycle;
            Index cols = 0;
            if (cycle == 0) {
                cols = orthonormalize_block(basis, 0, start, S);
                basis.leftCols(cols) = start.leftCols(cols);
            } else {
                cols = ritz_vectors.cols();
                basis.leftCols(cols) = ritz_vectors;
            }
            // expand with the unconverged directions only
            Matrix active;
            if (cycle == 0) {
                active = basis.leftCols(cols);
            } else {
                std::vector<Index> idx;
                for (Index j = 0; j < cols; ++j)
                    if (!converged[j]) idx.push_back(j);
                active.resize(n, static_cast<Index>(idx.size()));
                for (std::size_t j = 0; j < idx.size(); ++j) active.col(j) = basis.col(idx[j]);
            }
            for (Index s = 0; s < steps && active.cols() > 0; ++s) {
                Matrix z(n, active.cols());
                for (Index j = 0; j < active.cols(); ++j) {
                    z.col(j) = factor.solve(S.cwiseProduct(active.col(j)));
                }
                const Index added = orthonormalize_block(basis, cols, z, S);
                basis.middleCols(cols, added) = z.leftCols(added);
                cols += added;
                active = z.leftCols(added);
            }
            const auto v = basis.leftCols(cols);
            const Matrix lv = L * v;
            Matrix h = v.transpose() * lv;
            h = 0.5 * (h + h.transpose());
            Eigen::SelfAdjointEigenSolver<Matrix> rr(h);
            if (rr.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
            const Index take = std::min(keep, cols);
            ritz = rr.eigenvalues().head(take);
            ritz_vectors = v * rr.eigenvectors().leftCols(take);
            const Matrix lr = lv * rr.eigenvectors().leftCols(take);
            converged.assign(static_cast<std::size_t>(take), 0);
            done = take >= count;
            out.max_residual = 0.0;
            for (Index j = 0; j < take; ++j) {
                const Vector sy = S.cwiseProduct(ritz_vectors.col(j));
                const double res = (lr.col(j) - ritz[j] * sy).norm() / sy.norm();
                converged[j] = res <= tol;
                if (j < count) {
                    out.max_residual = std::max(out.max_residual, res);
                    done = done && converged[j];
                }
            }
        }
        if (!done) {
            throw SolverError("eigensolver did not converge after " +
                              std::to_string(max_cycles) + " restarts (max residual " +
                              std::to_string(out.max_residual) + ")");
        }
        out.values = ritz.head(count);
        out.vectors = ritz_vectors.leftCols(count);
    }

    const double ref = out.values.maxCoeff();
    const double thr = settings.kernel_threshold;
    if (!(ref > thr * lambda_max)) {
        out.all_below_threshold = true;
        out.kernel_dimension = count;
    } else {
        out.kernel_dimension = (out.values.array() < thr * ref).count();
    }
    return out;
}

// ---------------------------------------------------------------------------------------

struct SaddleSolver::Impl {
    Index n = 0;
    Index constraints = 0;
    std::vector<Index> free_of;  // primal index -> free index or -1
    std::vector<Index> primal_of; // free index -> primal index
    SparseMatrix exact;           // KKT without regularization, unscaled
    SparseMatrix B;               // scaled constraints on the free unknowns
    Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> penalty;
    double scale = 1.0;           // constraint row scaling inside the factorization
    SolverSettings settings;
    double mu = 0.0;
};

SaddleSolver::SaddleSolver(const SparseMatrix& M, const SparseMatrix& C,
                           const std::vector<Index>& pins, const std::vector<Index>& weak,
                           const SolverSettings& settings)
    : impl_(std::make_unique<Impl>())
{
    Impl& s = *impl_;
    s.settings = settings;
    s.n = M.rows();
    if (M.cols() != s.n) throw std::invalid_argument("saddle: M is not square");
    if (C.rows() > 0 && C.cols() != s.n) throw std::invalid_argument("saddle: C has wrong width");
    s.constraints = C.rows();
    s.free_of.assign(static_cast<std::size_t>(s.n), 0);
    for (Index p : pins) {
        if (p < 0 || p >= s.n) throw std::invalid_argument("saddle: pin out of range");
        s.free_of[p] = -1;
    }
    for (Index i = 0; i < s.n; ++i) {
        if (s.free_of[i] < 0) continue;
        s.free_of[i] = static_cast<Index>(s.primal_of.size());
        s.primal_of.push_back(i);
    }
    const Index nf = static_cast<Index>(s.primal_of.size());
    const Index total = nf + s.constraints;

    std::vector<Triplet> primal_entries;
    std::vector<Triplet> constraint_entries;
    primal_entries.reserve(static_cast<std::size_t>(M.nonZeros()));
    constraint_entries.reserve(static_cast<std::size_t>(2 * C.nonZeros()));
    double diag_sum = 0.0;
    Index diag_count = 0;
    for (Index c = 0; c < M.outerSize(); ++c) {
        const Index fc = s.free_of[c];
        if (fc < 0) continue;
        for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
            const Index fr = s.free_of[it.row()];
            if (fr < 0) continue;
            primal_entries.emplace_back(fr, fc, it.value());
            if (fr == fc && it.value() != 0.0) {
                diag_sum += it.value();
                ++diag_count;
            }
        }
    }
    double c_square = 0.0;
    for (Index c = 0; c < C.outerSize(); ++c) {
        const Index fc = s.free_of[c];
        if (fc < 0) continue;
        for (SparseMatrix::InnerIterator it(C, c); it; ++it) {
            constraint_entries.emplace_back(nf + it.row(), fc, it.value());
            constraint_entries.emplace_back(fc, nf + it.row(), it.value());
            c_square += it.value() * it.value();
        }
    }
    const double mean_diag = diag_count > 0 ? diag_sum / static_cast<double>(diag_count) : 1.0;
    s.mu = 1e-6 * mean_diag;
    // Balance the constraint rows against M so the quasi-definite pivots stay well scaled.
    if (s.constraints > 0 && c_square > 0.0) {
        s.scale = std::sqrt(mean_diag * static_cast<double>(s.constraints) / c_square);
    }

    std::vector<Triplet> all = primal_entries;
    all.insert(all.end(), constraint_entries.begin(), constraint_entries.end());
    s.exact.resize(total, total);
    s.exact.setFromTriplets(all.begin(), all.end());

    // [[M + mu I_weak, sC^T], [sC, -mu I]] is symmetric quasi-definite once the primal block
    // is definite, so LDL^T needs no pivoting and any fill-reducing ordering is stable.
    // The regularized system [[H, B^T], [B, -mu I]] with H = M + mu I_weak and B = sC is
    // solved through its SPD primal Schur complement H + B^T B / mu.
    std::vector<Triplet> h = primal_entries;
    for (Index w : weak) {
        if (w < 0 || w >= s.n) throw std::invalid_argument("saddle: weak index out of range");
        if (s.free_of[w] >= 0) h.emplace_back(s.free_of[w], s.free_of[w], s.mu);
    }
    SparseMatrix H(nf, nf);
    H.setFromTriplets(h.begin(), h.end());
    std::vector<Triplet> b;
    for (const auto& t : constraint_entries)
        if (t.row() >= nf) b.emplace_back(t.row() - nf, t.col(), s.scale * t.value());
    s.B.resize(s.constraints, nf);
    s.B.setFromTriplets(b.begin(), b.end());
    const SparseMatrix schur = H + SparseMatrix(s.B.transpose() * s.B) / s.mu;
    s.penalty.compute(schur);
    if (s.penalty.info() != Eigen::Success) {
        throw SolverError("KKT factorization failed: system is singular after pinning (" +
                          std::to_string(pins.size()) + " pins, " +
                          std::to_string(s.constraints) + " constraints)");
    }
}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

SaddleSolver::Solution SaddleSolver::solve(const Vector& f) const
{
    const Impl& s = *impl_;
    if (f.size() != s.n) throw std::invalid_argument("saddle: rhs size mismatch");
    const auto start = Clock::now();
    const Index nf = static_cast<Index>(s.primal_of.size());
    Vector rhs = Vector::Zero(nf + s.constraints);
    for (Index j = 0; j < nf; ++j) rhs[j] = f[s.primal_of[j]];

    Solution out;
    out.report.method = "cholmod-kkt-schur";
    out.report.regularization.mode = "pin";
    for (Index i = 0; i < s.n; ++i) {
        if (s.free_of[i] < 0) out.report.regularization.indices.push_back(i);
    }
    Vector x = Vector::Zero(rhs.size());
    const double bnorm = rhs.norm();
    if (bnorm > 0.0) {
        // the factorized system is diag(I, s) K diag(I, s), plus the regularization
        auto correction = [&](const Vector& r) {
            const Vector g = s.scale * r.tail(s.constraints);
            Vector dx(r.size());
            dx.head(nf) = s.penalty.solve(r.head(nf) + s.B.transpose() * g / s.mu);
            dx.tail(s.constraints) = s.scale * (s.B * dx.head(nf) - g) / s.mu;
            return dx;
        };
        x = correction(rhs);
        double previous = std::numeric_limits<double>::infinity();
        for (int step = 0; step < std::max(s.settings.refinement_steps, 30); ++step) {
            const Vector r = rhs - s.exact * x;
            const double rn = r.norm();
            // stop at the target or once rounding stalls the iteration
            if (rn <= 1e-3 * s.settings.tol * bnorm || rn > 0.5 * previous) break;
            previous = rn;
            ++out.report.iterations;
            x += correction(r);
        }
        out.report.relative_residual = (rhs - s.exact * x).norm() / bnorm;
    }
    out.primal = Vector::Zero(s.n);
    for (Index j = 0; j < nf; ++j) out.primal[s.primal_of[j]] = x[j];
    out.multipliers = x.tail(s.constraints);
    out.report.seconds = seconds_since(start);
    if (!(out.report.relative_residual <= 1e-9)) {
        throw SolverError("KKT solve did not reach tolerance: relative residual " +
                          std::to_string(out.report.relative_residual));
    }
    return out;
}

SaddleSolver::Solution solve_saddle(const SparseMatrix& M, const SparseMatrix& C,
                                    const Vector& f, const std::vector<Index>& pins,
                                    const SolverSettings& settings)
{
    return SaddleSolver(M, C, pins, {}, settings).solve(f);
}

} // namespace hodge
