#include "hodge/linalg.hpp"
#include "hodge/operators.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hodge;

namespace {

OperatorSet preset_ops(const std::string& name, Index n)
{
    const Preset p = make_preset(name);
    return build_operators(sample_levelset(complex_for_box(p.box_lo, p.box_hi, n), p.rho));
}

Vector random_vector(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

SparseMatrix path_laplacian(Index n)
{
    std::vector<Triplet> t;
    for (Index i = 0; i + 1 < n; ++i) {
        t.emplace_back(i, i, 1.0);
        t.emplace_back(i + 1, i + 1, 1.0);
        t.emplace_back(i, i + 1, -1.0);
        t.emplace_back(i + 1, i, -1.0);
    }
    SparseMatrix l(n, n);
    l.setFromTriplets(t.begin(), t.end());
    return l;
}

SparseMatrix identity(Index n)
{
    SparseMatrix a(n, n);
    a.setIdentity();
    return a;
}

} // namespace

TEST_CASE("identity solve")
{
    const Vector b = random_vector(50, 1);
    const auto [x, report] = solve_spsd(identity(50), b);
    CHECK((x - b).norm() <= 1e-14 * b.norm());
    CHECK(report.relative_residual <= 1e-10);
}

TEST_CASE("pinned tangential vertex laplacian on the annulus")
{
    const auto ops = preset_ops("annulus", 100);
    const SparseMatrix l = ops.laplacian(SupportKind::tangential, 0);
    const Vector w = random_vector(ops.tangential[1].size(), 2);
    const Vector b = ops.Dt[0].transpose() * ops.St[1].cwiseProduct(w);
    SpsdSolver solver(l, pin_kernel(l, {0}, PinMode::pin, 1));
    SolveReport report;
    const Vector x = solver.solve(b, &report);
    CHECK(report.relative_residual <= 1e-10);
    CHECK(x[0] == 0.0);
    CHECK(report.regularization.mode == "pin");

    // a constant right-hand side lies in the kernel and cannot be met
    CHECK_THROWS_AS(solver.solve(Vector::Ones(b.size())), SolverError);
    // wrong number of pins for a one-dimensional kernel
    CHECK_THROWS_AS(pin_kernel(l, {0, 5}, PinMode::pin, 1), std::invalid_argument);
}

TEST_CASE("two components need two pins")
{
    const auto ops = preset_ops("two_disks", 40);
    const SparseMatrix l = ops.laplacian(SupportKind::tangential, 0);
    CHECK_THROWS_AS(pin_kernel(l, {0}, PinMode::pin, 2), std::invalid_argument);
    // one pin per component, found by graph search from vertex 0
    std::vector<Index> pins{0};
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(l.rows()), 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        for (SparseMatrix::InnerIterator it(l, v); it; ++it) {
            if (!seen[it.row()]) {
                seen[it.row()] = 1;
                stack.push_back(it.row());
            }
        }
    }
    for (Index v = 0; v < l.rows(); ++v) {
        if (!seen[v]) {
            pins.push_back(v);
            break;
        }
    }
    REQUIRE(pins.size() == 2);
    SpsdSolver solver(l, pin_kernel(l, pins, PinMode::pin, 2));
    const Vector w = random_vector(ops.tangential[1].size(), 3);
    const Vector b = ops.Dt[0].transpose() * ops.St[1].cwiseProduct(w);
    SolveReport report;
    solver.solve(b, &report);
    CHECK(report.relative_residual <= 1e-10);
}

TEST_CASE("augmented shell face laplacian")
{
    const auto ops = preset_ops("shell", 16);
    const SparseMatrix l = ops.laplacian(SupportKind::tangential, 2);
    const auto eig = smallest_eigs(l, ops.St[2], 3);
    REQUIRE(eig.kernel_dimension == 1);
    Index idx = 0;
    eig.vectors.col(0).cwiseAbs().maxCoeff(&idx);
    SpsdSolver solver(l, pin_kernel(l, {idx}, PinMode::augment, 1));
    const Vector w = random_vector(ops.tangential[1].size(), 4);
    const Vector b = ops.St[2].cwiseProduct(ops.Dt[1] * w);
    SolveReport report;
    solver.solve(b, &report);
    CHECK(report.relative_residual <= 1e-10);
    CHECK(report.regularization.mode == "augment");
}

TEST_CASE("eigenvalues of a path graph")
{
    const Index n = 1500;
    const SparseMatrix l = path_laplacian(n);
    const auto eig = smallest_eigs(l, Vector::Ones(n), 6);
    for (Index k = 0; k < 6; ++k) {
        const double exact = 2.0 - 2.0 * std::cos(M_PI * static_cast<double>(k) / n);
        CHECK(std::abs(eig.values[k] - exact) <= 1e-11);
    }
    CHECK(eig.kernel_dimension == 1);
    const Matrix gram = eig.vectors.transpose() * eig.vectors;
    CHECK((gram - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("L = S gives unit eigenvalues")
{
    const Index n = 900;
    Vector s = Vector::LinSpaced(n, 1.0, 3.0);
    const SparseMatrix l = SparseMatrix(s.asDiagonal());
    const auto eig = smallest_eigs(l, s, 4);
    CHECK((eig.values.array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(eig.kernel_dimension == 0);
    CHECK_THROWS(smallest_eigs(l, s, n + 1));
}

TEST_CASE("Krylov and dense eigenvalues agree")
{
    const auto ops = preset_ops("disk", 28);
    const SparseMatrix l = ops.laplacian(SupportKind::normal, 1);
    REQUIRE(l.rows() > 400);
    const auto krylov = smallest_eigs(l, ops.Sn[1], 5);
    const Vector w = ops.Sn[1].cwiseSqrt().cwiseInverse();
    const Matrix a = w.asDiagonal() * Matrix(l) * w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> dense(a, Eigen::EigenvaluesOnly);
    for (Index k = 0; k < 5; ++k) {
        CHECK(krylov.values[k] == doctest::Approx(dense.eigenvalues()[k]).epsilon(1e-8));
    }
    const Matrix gram = krylov.vectors.transpose() * ops.Sn[1].asDiagonal() * krylov.vectors;
    CHECK((gram - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("annulus tangential 1-form kernel")
{
    const auto ops = preset_ops("annulus", 60);
    const auto eig = smallest_eigs(ops.laplacian(SupportKind::tangential, 1), ops.St[1], 2);
    CHECK(eig.kernel_dimension == 1);
    CHECK(eig.values[1] > 0.0);
}

TEST_CASE("saddle solver")
{
    SUBCASE("empty constraint reduces to a plain solve")
    {
        const SparseMatrix m = path_laplacian(30) + identity(30);
        const Vector f = random_vector(30, 5);
        const auto sol = solve_saddle(m, SparseMatrix(0, 30), f);
        const auto [x, rep] = solve_spsd(m, f);
        CHECK((sol.primal - x).norm() <= 1e-12 * x.norm());
    }
    SUBCASE("harmonic target is a fixed point and constraints hold")
    {
        const auto ops = preset_ops("disk", 32);
        const Index ne = ops.extended0.size();
        const SparseMatrix& p = ops.extended_to_tangential;
        const SparseMatrix m =
            SparseMatrix(p.transpose() * ops.laplacian(SupportKind::tangential, 0) * p);
        std::vector<Index> weak;
        std::vector<std::uint8_t> in_t(static_cast<std::size_t>(ne), 0);
        for (Index i = 0; i < p.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(p, i); it; ++it) in_t[it.col()] = 1;
        for (Index i = 0; i < ne; ++i)
            if (!in_t[i]) weak.push_back(i);
        const Index pin = ops.extended0.local[ops.tangential[0].cells[0]];
        SaddleSolver solver(m, ops.L0E, {pin}, weak);

        // random target
        const Vector target = random_vector(ops.tangential[0].size(), 6);
        const Vector f = p.transpose() * (ops.laplacian(SupportKind::tangential, 0) * target);
        const auto sol = solver.solve(f);
        CHECK((ops.L0E * sol.primal).norm() <= 1e-9 * sol.primal.norm());
        CHECK(sol.report.relative_residual <= 1e-9);

        // feed the projected result back in: it must reproduce itself
        const Vector a = sol.primal;
        const Vector f2 = p.transpose() * (ops.laplacian(SupportKind::tangential, 0) * (p * a));
        const auto again = solver.solve(f2);
        const Vector da = ops.Dt[0] * (p * a);
        const Vector db = ops.Dt[0] * (p * again.primal);
        CHECK((da - db).norm() <= 1e-8 * da.norm());
    }
}

TEST_CASE("S-orthonormalization")
{
    const Vector s = Vector::LinSpaced(20, 0.5, 2.0);
    SUBCASE("single vector")
    {
        const Vector v = random_vector(20, 7);
        const auto q = gram_schmidt_S(v, s);
        REQUIRE(q.basis.cols() == 1);
        CHECK(q.basis.col(0).dot(s.cwiseProduct(q.basis.col(0))) == doctest::Approx(1.0));
        CHECK((q.basis.col(0) / q.basis(0, 0) - v / v[0]).norm() <= 1e-12);
    }
    SUBCASE("orthogonal inputs are only rescaled")
    {
        Matrix v = Matrix::Zero(20, 2);
        v(0, 0) = 3.0;
        v(5, 1) = -2.0;
        const auto q = gram_schmidt_S(v, s);
        CHECK(q.basis(0, 0) == doctest::Approx(1.0 / std::sqrt(s[0])));
        CHECK(q.basis(5, 1) == doctest::Approx(-1.0 / std::sqrt(s[5])));
    }
    SUBCASE("random block")
    {
        Matrix v(20, 3);
        for (Index j = 0; j < 3; ++j) v.col(j) = random_vector(20, 10 + j);
        const auto q = gram_schmidt_S(v, s);
        const Matrix g = q.basis.transpose() * s.asDiagonal() * q.basis;
        CHECK((g - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("dependent column is dropped")
    {
        Matrix v(20, 3);
        v.col(0) = random_vector(20, 20);
        v.col(1) = random_vector(20, 21);
        v.col(2) = 2.0 * v.col(0) - v.col(1);
        const auto q = gram_schmidt_S(v, s);
        CHECK(q.basis.cols() == 2);
        REQUIRE(q.dropped.size() == 1);
        CHECK(q.dropped[0] == 2);
    }
}
