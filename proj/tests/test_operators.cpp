#include "hodge/operators.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cstdio>
#include <fstream>
#include <random>

using namespace hodge;

namespace {

LevelSetField preset_field(const std::string& name, Index n)
{
    const Preset p = make_preset(name);
    return sample_levelset(complex_for_box(p.box_lo, p.box_hi, n), p.rho);
}

double max_abs(const SparseMatrix& a)
{
    double out = 0.0;
    for (Index c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) out = std::max(out, std::abs(it.value()));
    }
    return out;
}

SparseMatrix to_double(const SparseIncidence& d) { return d.cast<double>(); }

} // namespace

TEST_CASE("full supports reproduce the grid incidence")
{
    const auto cx = build_complex(3, {4, 3, 5}, 0.5, {0.0, 0.0, 0.0});
    const auto field = sample_levelset(cx, [](const Point&) { return -1.0; });
    const auto ops = build_operators(field);
    for (int k = 0; k < 3; ++k) {
        CHECK(ops.normal[k].size() == cx.cell_count(k));
        CHECK(ops.tangential[k].size() == cx.cell_count(k));
        CHECK(max_abs(ops.Dn[k] - to_double(cx.incidence(k))) == 0.0);
        CHECK(max_abs(ops.Dt[k] - to_double(cx.incidence(k))) == 0.0);
    }
    // unmodified stars l^(m-2k)
    for (int k = 0; k <= 3; ++k) {
        const double expect = std::pow(0.5, 3 - 2 * k);
        CHECK((ops.Sn[k].array() - expect).abs().maxCoeff() < 1e-14);
        // dual cells of box-boundary cells are clipped by the grid
        for (Index i = 0; i < ops.tangential[k].size(); ++i) {
            const Cell c = cx.cell(k, ops.tangential[k].cells[i]);
            if (cx.incident_top_cells(c).size() == (1u << (3 - k))) {
                CHECK(std::abs(ops.St[k][i] - expect) < 1e-14);
            }
        }
    }
    CHECK(ops.Sn[1][0] == doctest::Approx(0.5));
}

TEST_CASE("projected differentials are nilpotent")
{
    for (const auto& [name, n] : std::vector<std::pair<std::string, Index>>{
             {"annulus", 64}, {"disk", 32}, {"shell", 14}, {"torus", 14}}) {
        const auto ops = build_operators(preset_field(name, n));
        for (int k = 0; k + 1 < ops.dim; ++k) {
            CHECK(max_abs(SparseMatrix(ops.Dt[k + 1] * ops.Dt[k])) == 0.0);
            CHECK(max_abs(SparseMatrix(ops.Dn[k + 1] * ops.Dn[k])) == 0.0);
        }
    }
}

TEST_CASE("projection identities between supports and the grid incidence")
{
    for (const auto& [name, n] :
         std::vector<std::pair<std::string, Index>>{{"disk", 24}, {"shell", 12}}) {
        const auto field = preset_field(name, n);
        const auto& cx = field.complex();
        for (int k = 0; k < cx.dim(); ++k) {
            const auto nk = build_support(field, SupportKind::normal, k);
            const auto nk1 = build_support(field, SupportKind::normal, k + 1);
            const auto tk = build_support(field, SupportKind::tangential, k);
            const auto tk1 = build_support(field, SupportKind::tangential, k + 1);
            const SparseIncidence d = cx.incidence(k);
            int violations = 0;
            for (Index c = 0; c < d.outerSize(); ++c) {
                for (SparseIncidence::InnerIterator it(d, c); it; ++it) {
                    // D P_n^T lands inside the normal (k+1)-support
                    if (nk.contains(c) && !nk1.contains(it.row())) ++violations;
                    // tangential (k+1)-rows only reach tangential k-cells
                    if (tk1.contains(it.row()) && !tk.contains(c)) ++violations;
                }
            }
            CHECK(violations == 0);
        }
    }
}

TEST_CASE("normal support drops edges with no inside vertex")
{
    const auto field = preset_field("disk", 20);
    const auto ops = build_operators(field);
    const auto& cx = field.complex();
    for (Index i = 0; i < ops.normal[1].size(); ++i) {
        const auto ends = cx.cell_vertices(cx.cell(1, ops.normal[1].cells[i]));
        CHECK((field.vertex_inside(cx.vertex_id(ends[0])) ||
               field.vertex_inside(cx.vertex_id(ends[1]))));
    }
    CHECK(ops.Dn[0].rows() == ops.normal[1].size());
    CHECK(ops.Dn[0].rows() < cx.cell_count(1));
}

TEST_CASE("hodge star entries")
{
    SUBCASE("interior vertex in 2D")
    {
        const auto cx = build_complex(2, {5, 5}, 0.25, {0.0, 0.0});
        const auto field = sample_levelset(cx, [](const Point&) { return -1.0; });
        const auto t0 = build_support(field, SupportKind::tangential, 0);
        const Vector s = hodge_star(fractional_volume(field, 0, Side::dual), t0, 0.25, 2,
                                    field.relative_floor());
        CHECK(s[t0.local[cx.vertex_id({2, 2, 0})]] == doctest::Approx(0.0625));
    }
    SUBCASE("edge whose dual cell is half inside")
    {
        // 3D: x-edge at (1,1,1) of a 3^3 vertex grid; its four incident cell centers sit at
        // y,z in {0.5, 1.5}; inside iff y < 1, so half of the dual face is inside.
        const double l = 0.5;
        const auto cx = build_complex(3, {3, 3, 3}, l, {0.0, 0.0, 0.0});
        const auto field = sample_levelset(cx, [&](const Point& x) { return x.y() - l; });
        const auto t1 = build_support(field, SupportKind::tangential, 1);
        const Index e = cx.cell_id(Cell{0b001u, {0, 1, 1}});
        REQUIRE(t1.contains(e));
        const Vector s = hodge_star(fractional_volume(field, 1, Side::dual), t1, l, 3,
                                    field.relative_floor());
        CHECK(s[t1.local[e]] == doctest::Approx(l / 2).epsilon(1e-4));

        // same situation in 2D: the dual cell is a segment of length l, half inside
        const auto g2 = build_complex(2, {3, 3}, l, {0.0, 0.0});
        const auto f2 = sample_levelset(g2, [&](const Point& x) { return x.y() - l; });
        const auto s1 = build_support(f2, SupportKind::tangential, 1);
        const Index e2 = g2.cell_id(Cell{0b01u, {0, 1, 0}});
        const Vector s2 =
            hodge_star(fractional_volume(f2, 1, Side::dual), s1, l, 2, f2.relative_floor());
        CHECK(s2[s1.local[e2]] == doctest::Approx(0.5).epsilon(1e-4));
    }
    SUBCASE("zero fractions are floored and all entries are positive and finite")
    {
        const auto ops = build_operators(preset_field("annulus", 40));
        for (int k = 0; k <= 2; ++k) {
            CHECK((ops.Sn[k].array() > 0.0).all());
            CHECK((ops.St[k].array() > 0.0).all());
            CHECK(ops.Sn[k].allFinite());
            CHECK(ops.St[k].allFinite());
        }
    }
    SUBCASE("fraction side must match the support kind")
    {
        const auto field = preset_field("disk", 10);
        const auto n1 = build_support(field, SupportKind::normal, 1);
        CHECK_THROWS(hodge_star(fractional_volume(field, 1, Side::dual), n1, 1.0, 2, 1e-5));
    }
}

TEST_CASE("laplacians are symmetric and positive semidefinite")
{
    for (const auto& [name, n] :
         std::vector<std::pair<std::string, Index>>{{"annulus", 18}, {"disk", 14}, {"shell", 8}}) {
        const auto ops = build_operators(preset_field(name, n));
        for (int k = 0; k <= ops.dim; ++k) {
            for (SupportKind kind : {SupportKind::normal, SupportKind::tangential}) {
                const SparseMatrix l = ops.laplacian(kind, k);
                const double scale = max_abs(l);
                CHECK(max_abs(SparseMatrix(l - SparseMatrix(l.transpose()))) <= 1e-13 * scale);
                // generalized spectrum against S
                const Vector s = ops.S(kind, k);
                const Vector w = s.cwiseSqrt().cwiseInverse();
                const Matrix a = w.asDiagonal() * Matrix(l) * w.asDiagonal();
                Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
                const double top = eig.eigenvalues().maxCoeff();
                CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * top);
            }
        }
    }
}

TEST_CASE("lower-degree term is dropped at k = 0")
{
    const auto ops = build_operators(preset_field("disk", 12));
    const SparseMatrix l0 = ops.laplacian(SupportKind::normal, 0);
    const SparseMatrix direct =
        SparseMatrix(ops.Dn[0].transpose() * ops.Sn[1].asDiagonal() * ops.Dn[0]);
    CHECK(max_abs(SparseMatrix(l0 - direct)) <= 1e-14 * max_abs(direct));
    CHECK_THROWS(ops.laplacian(SupportKind::normal, 3));
}

TEST_CASE("codifferential is the adjoint of the differential")
{
    const auto ops = build_operators(preset_field("torus", 12));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int k = 1; k <= 3; ++k) {
        Vector a(ops.tangential[k - 1].size());
        Vector w(ops.tangential[k].size());
        for (auto& x : a) x = g(rng);
        for (auto& x : w) x = g(rng);
        const double lhs = (ops.Dt[k - 1] * a).dot(ops.St[k].cwiseProduct(w));
        const double rhs = a.dot(ops.St[k - 1].cwiseProduct(ops.codifferential_t(k, w)));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + std::abs(rhs)));
    }
}

TEST_CASE("extended graph laplacian")
{
    const auto field = preset_field("disk", 32);
    const auto ops = build_operators(field);
    const auto& cx = field.complex();
    const SparseMatrix& l = ops.L0E;
    CHECK(l.rows() == ops.normal[0].size());
    CHECK(l.cols() == ops.extended0.size());

    const Vector ones = Vector::Ones(l.cols());
    CHECK((l * ones).cwiseAbs().maxCoeff() == 0.0);

    // interior vertex: standard 5-point stencil
    const Index v = cx.vertex_id({15, 15, 0});
    const Index row = ops.normal[0].local[v];
    const Matrix dense = Matrix(l);
    CHECK(dense(row, ops.extended0.local[v]) == 4.0);
    CHECK(dense.row(row).cwiseAbs().sum() == 8.0);
    for (const MultiIndex& nb : std::vector<MultiIndex>{{14, 15, 0}, {16, 15, 0}, {15, 14, 0},
                                                        {15, 16, 0}}) {
        CHECK(dense(row, ops.extended0.local[cx.vertex_id(nb)]) == -1.0);
    }
}

TEST_CASE("conversion operator")
{
    const auto field = preset_field("disk", 24);
    const auto ops = build_operators(field);
    const auto& c = ops.conversion;
    CHECK(c.rows() == ops.tangential[1].size());
    CHECK(c.cols() == ops.normal[1].size());
    CHECK((c * Vector::Zero(c.cols())).isZero(0.0));

    // fully interior edges pass through with factor 1
    const auto& cx = field.complex();
    const Index e = cx.cell_id(Cell{0b01u, {12, 12, 0}});
    const Matrix dense = Matrix(c);
    CHECK(dense(ops.tangential[1].local[e], ops.normal[1].local[e]) == doctest::Approx(1.0));
    CHECK(dense.row(ops.tangential[1].local[e]).cwiseAbs().sum() == doctest::Approx(1.0));

    const auto ops3 = build_operators(preset_field("ball", 10));
    const auto& cx3 = ops3.normal[1];
    const auto field3 = preset_field("ball", 10);
    const Index e3 = field3.complex().cell_id(Cell{0b010u, {4, 4, 4}});
    REQUIRE(cx3.contains(e3));
    const Matrix d3 = Matrix(ops3.conversion);
    CHECK(d3(ops3.tangential[1].local[e3], ops3.normal[1].local[e3]) == doctest::Approx(1.0));
}

TEST_CASE("matrix market dump")
{
    SparseMatrix a(2, 3);
    a.insert(0, 1) = 1.5;
    a.insert(1, 2) = -2.0;
    const std::string path = "operators_dump_test.mtx";
    write_matrix_market(path, a);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real general");
    Index r, c, nnz;
    in >> r >> c >> nnz;
    CHECK(r == 2);
    CHECK(c == 3);
    CHECK(nnz == 2);
    std::remove(path.c_str());
}
