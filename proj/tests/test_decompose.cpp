#include "hodge/decompose.hpp"
#include "hodge/validate.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace hodge;

namespace {

LevelSetField full_square(Index n, double l, double x0 = 0.0)
{
    return sample_levelset(build_complex(2, {n, n}, l, {x0, x0}), [](const Point&) { return -1.0; });
}

// local index of the x-edge with lower vertex (i, j)
Index x_edge(const LevelSetField& f, const SupportSet& s, Index i, Index j)
{
    return s.local[f.complex().cell_id(Cell{1u, {i, j, 0}})];
}

double s_norm(const Vector& v, const Vector& S) { return std::sqrt(v.dot(S.cwiseProduct(v))); }

Vector random_vector(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vector v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

struct Setup {
    LevelSetField field;
    OperatorSet ops;
    BettiNumbers betti;
};

Setup setup(const std::string& preset, Index n)
{
    LevelSetField field = preset_field(preset, n);
    OperatorSet ops = build_operators(field);
    BettiNumbers betti = betti_oracle(field);
    return {std::move(field), std::move(ops), betti};
}

DiscreteForm tangential_of(const Setup& s, const VectorFunction& f)
{
    return discretize_tangential(sample_field(s.field, f), s.field, s.ops.tangential[1]);
}

} // namespace

TEST_CASE("normal discretization integrates along edges")
{
    const auto field = full_square(5, 0.5);
    const auto normal = build_support(field, SupportKind::normal, 1);
    const auto ones = sample_field(field, [](const Point&) { return Point(1.0, 0.0, 0.0); });
    CHECK(discretize_normal(ones, field, normal).values[x_edge(field, normal, 1, 2)] ==
          doctest::Approx(0.5));

    const auto unit = full_square(4, 1.0);
    const auto unit_normal = build_support(unit, SupportKind::normal, 1);
    const auto linear = sample_field(unit, [](const Point& p) { return Point(p[0], 0.0, 0.0); });
    // trapezoid rule is exact: integral of x over [0, 1]
    CHECK(discretize_normal(linear, unit, unit_normal).values[x_edge(unit, unit_normal, 0, 1)] ==
          doctest::Approx(0.5));

    const auto zero = sample_field(field, [](const Point&) { return Point::Zero().eval(); });
    CHECK(discretize_normal(zero, field, normal).values.cwiseAbs().maxCoeff() == 0.0);

    const auto tangential = build_support(field, SupportKind::tangential, 1);
    CHECK_THROWS_AS(discretize_normal(ones, field, tangential), std::invalid_argument);
}

TEST_CASE("tangential discretization samples incident cell centers")
{
    const auto field = full_square(5, 0.5);
    const auto tangential = build_support(field, SupportKind::tangential, 1);
    const auto ones = sample_field(field, [](const Point&) { return Point(1.0, 0.0, 0.0); });
    CHECK(discretize_tangential(ones, field, tangential).values[x_edge(field, tangential, 1, 2)] ==
          doctest::Approx(0.5));
    const auto zero = sample_field(field, [](const Point&) { return Point::Zero().eval(); });
    CHECK(discretize_tangential(zero, field, tangential).values.cwiseAbs().maxCoeff() == 0.0);

    // boundary edges of the disk with a single inside incident center take that center's value
    const Setup s = setup("disk", 30);
    const auto& cx = s.field.complex();
    const VectorFunction f = [](const Point& p) { return Point(1.0 + p[0] + 2.0 * p[1], 3.0 * p[0] - p[1], 0.0); };
    const auto samples = sample_field(s.field, f);
    const Vector W = discretize_tangential(samples, s.field, s.ops.tangential[1]).values;
    int checked = 0;
    for (Index e = 0; e < s.ops.tangential[1].size(); ++e) {
        const Cell edge = cx.cell(1, s.ops.tangential[1].cells[e]);
        const auto centers = inside_dual_vertices(s.field, edge);
        if (centers.size() != 1) continue;
        const int axis = edge.spans(0) ? 0 : 1;
        const Point at = cx.center(Cell{cx.full_mask(), centers[0]});
        CHECK(W[e] == doctest::Approx(cx.spacing() * f(at)[axis]).epsilon(1e-14));
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("extended samples average every finite incident center")
{
    const Setup s = setup("annulus", 40);
    const auto& cx = s.field.complex();
    const AnalyticField f = analytic_field("paper2d");
    const auto samples = sample_field(s.field, f.total, SampleExtent::extended);
    const Vector W = discretize_tangential(samples, s.field, s.ops.tangential[1]).values;
    for (Index e = 0; e < s.ops.tangential[1].size(); e += 7) {
        const Cell edge = cx.cell(1, s.ops.tangential[1].cells[e]);
        const int axis = edge.spans(0) ? 0 : 1;
        double sum = 0.0;
        const auto tops = cx.incident_top_cells(edge);
        for (const auto& t : tops) sum += f.total(cx.center(Cell{cx.full_mask(), t}))[axis];
        CHECK(W[e] == doctest::Approx(cx.spacing() * sum / static_cast<double>(tops.size())));
    }
}

TEST_CASE("Whitney reconstruction")
{
    const auto field = full_square(9, 0.25, -1.0);
    const auto& cx = field.complex();
    const auto tangential = build_support(field, SupportKind::tangential, 1);
    const auto constant =
        discretize_tangential(sample_field(field, [](const Point&) { return Point(0.7, -1.3, 0.0); }),
                              field, tangential);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.75, 0.75);
    for (int i = 0; i < 50; ++i) {
        const Point p(u(rng), u(rng), 0.0);
        const Point r = whitney_reconstruct(cx, tangential, constant, p);
        CHECK(r[0] == doctest::Approx(0.7));
        CHECK(r[1] == doctest::Approx(-1.3));
    }
    const DiscreteForm zero{1, SupportKind::tangential, Vector::Zero(tangential.size())};
    CHECK(whitney_reconstruct(cx, tangential, zero, Point(0.1, 0.2, 0.0)).norm() == 0.0);
    CHECK_THROWS_AS(whitney_reconstruct(cx, tangential, constant, Point(1.5, 0.0, 0.0)),
                    std::out_of_range);

    // linear field on the disk: O(l) error at inside cell centers
    const Setup s = setup("disk", 60);
    const Eigen::Matrix2d grad{{1.0, 2.0}, {3.0, -1.0}};
    const VectorFunction v = [&](const Point& p) {
        return Point(grad(0, 0) * p[0] + grad(0, 1) * p[1], grad(1, 0) * p[0] + grad(1, 1) * p[1], 0.0);
    };
    const DiscreteForm W = tangential_of(s, v);
    const auto& dx = s.field.complex();
    const double bound = 0.5 * dx.spacing() * grad.norm();
    double worst = 0.0;
    for (Index c = 0; c < dx.cell_count(2); ++c) {
        if (!s.field.center_inside(c)) continue;
        const Point p = dx.center(dx.cell(2, c));
        worst = std::max(worst, (whitney_reconstruct(dx, s.ops.tangential[1], W, p) - v(p)).norm());
    }
    CHECK(worst <= bound);
}

TEST_CASE("conversion carries a constant field between supports")
{
    const Setup s = setup("disk", 40);
    const VectorFunction f = [](const Point&) { return Point(0.3, 1.1, 0.0); };
    const auto samples = sample_field(s.field, f);
    const Vector Wt = discretize_tangential(samples, s.field, s.ops.tangential[1]).values;
    const Vector Wn = discretize_normal(samples, s.field, s.ops.normal[1]).values;
    const Vector converted = s.ops.conversion * Wn;
    // interior edges carry the full line integral on both sides
    const auto& cx = s.field.complex();
    int interior = 0;
    for (Index e = 0; e < s.ops.tangential[1].size(); ++e) {
        const Cell edge = cx.cell(1, s.ops.tangential[1].cells[e]);
        if (inside_dual_vertices(s.field, edge).size() != 2) continue;
        bool ends_inside = true;
        for (const auto& v : cx.cell_vertices(edge)) ends_inside &= s.field.vertex_inside(cx.vertex_id(v));
        if (!ends_inside) continue;
        CHECK(converted[e] == doctest::Approx(Wt[e]).epsilon(1e-12));
        ++interior;
    }
    CHECK(interior > 100);
}

TEST_CASE("gram matrix of a single nonzero component has rank 1")
{
    std::array<Vector, 5> parts;
    const Vector S = Vector::Constant(6, 2.0);
    for (auto& p : parts) p = Vector::Zero(6);
    parts[tangential_curl] = random_vector(6, 3);
    const Matrix g = gram_matrix(parts, S);
    Eigen::FullPivLU<Matrix> lu(g);
    CHECK(lu.rank() == 1);
    CHECK(g(1, 1) == doctest::Approx(2.0 * parts[1].squaredNorm()));
    parts[0] = Vector::Zero(5);
    CHECK_THROWS_AS(gram_matrix(parts, S), std::invalid_argument);
}

TEST_CASE("direct decomposition of a gradient with zero boundary values")
{
    const Setup s = setup("disk", 100);
    // phi = (1 - r^2) x vanishes on the unit circle
    const VectorFunction grad = [](const Point& p) {
        const double x = p[0], y = p[1];
        return Point(1.0 - 3.0 * x * x - y * y, -2.0 * x * y, 0.0);
    };
    const auto samples = sample_field(s.field, grad);
    const DiscreteForm Wn = discretize_normal(samples, s.field, s.ops.normal[1]);
    const DiscreteForm Wt = discretize_tangential(samples, s.field, s.ops.tangential[1]);
    const Decomposition d = decompose_direct(Wn, Wt, s.ops, s.betti);
    CHECK(d.mode == "direct");
    const Vector& S = s.ops.St[1];
    const double total = s_norm(Wt.values, S);
    for (int c : {tangential_curl, normal_harmonic, tangential_harmonic, curly_gradient}) {
        CAPTURE(component_names[c]);
        CHECK(s_norm(d.components[c], S) <= 0.05 * total);
    }
    CHECK(d.reconstruction_residual < 1e-12);

    const auto zero = sample_field(s.field, [](const Point&) { return Point::Zero().eval(); });
    const Decomposition z = decompose_direct(discretize_normal(zero, s.field, s.ops.normal[1]),
                                             discretize_tangential(zero, s.field, s.ops.tangential[1]),
                                             s.ops, s.betti);
    for (const auto& c : z.components) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("direct decomposition of the annulus field fills every component")
{
    const Setup s = setup("annulus", 60);
    const AnalyticField f = analytic_field("paper2d");
    const auto samples = sample_field(s.field, f.total);
    const Decomposition direct =
        decompose_direct(discretize_normal(samples, s.field, s.ops.normal[1]),
                         discretize_tangential(samples, s.field, s.ops.tangential[1]), s.ops, s.betti);
    const Decomposition ortho =
        decompose_orthogonal(discretize_tangential(samples, s.field, s.ops.tangential[1]), s.ops, s.betti);
    for (int c = 0; c < 5; ++c) {
        CAPTURE(component_names[c]);
        CHECK(s_norm(direct.components[c], s.ops.St[1]) > 0.1);
    }
    MESSAGE("max off-diagonal gram ratio: direct " << max_gram_ratio(direct.gram) << ", orthogonal "
                                                    << max_gram_ratio(ortho.gram));
}

TEST_CASE("orthogonal decomposition invariants on the annulus")
{
    const Setup s = setup("annulus", 50);
    const Vector& S = s.ops.St[1];
    const AnalyticField f = analytic_field("paper2d");
    const DiscreteForm W1 = tangential_of(s, f.total);
    DiscreteForm W2 = W1;
    W2.values = random_vector(W1.values.size(), 11);

    const Decomposition d1 = decompose_orthogonal(W1, s.ops, s.betti);
    const Decomposition d2 = decompose_orthogonal(W2, s.ops, s.betti);

    for (const Decomposition* d : {&d1, &d2}) {
        CHECK(d->mode == "orthogonal");
        CHECK(max_gram_ratio(d->gram) <= 1e-8);
        CHECK(d->reconstruction_residual <= 1e-8);
        for (int c = 0; c < 5; ++c) CHECK(d->gram(c, c) > 0.0);
        CHECK(d->pins.size() == 1);

        // T is closed and coclosed
        const Vector& T = d->components[tangential_harmonic];
        const double tn = s_norm(T, S);
        const Vector curl = s.ops.Dt[1] * T;
        const Vector div = s.ops.codifferential_t(1, T);
        CHECK(s_norm(curl, s.ops.St[2]) <= 1e-8 * tn / s.ops.spacing);
        CHECK(s_norm(div, s.ops.St[0]) <= 1e-8 * tn / s.ops.spacing);

        // G is a gradient: least-squares potential recovery reproduces it
        const Vector& G = d->components[normal_gradient];
        const SparseMatrix L0 = s.ops.laplacian(SupportKind::tangential, 0);
        const Components comps = vertex_components(s.ops.Dt[0]);
        const SpsdSolver solver(L0, pin_kernel(L0, comps.lowest, PinMode::pin, 1));
        const Vector phi = solver.solve(s.ops.Dt[0].transpose() * S.cwiseProduct(G));
        CHECK(s_norm(s.ops.Dt[0] * phi - G, S) <= 1e-9 * s_norm(G, S));
    }

    // linearity
    const double a = 0.7, b = -2.3;
    DiscreteForm W3 = W1;
    W3.values = a * W1.values + b * W2.values;
    const Decomposition d3 = decompose_orthogonal(W3, s.ops, s.betti);
    const double scale = s_norm(W3.values, S);
    for (int c = 0; c < 5; ++c) {
        CAPTURE(component_names[c]);
        const Vector expect = a * d1.components[c] + b * d2.components[c];
        CHECK(s_norm(d3.components[c] - expect, S) <= 1e-8 * scale);
    }

    // each component is a fixed point of the decomposition
    for (int c = 0; c < 5; ++c) {
        CAPTURE(component_names[c]);
        DiscreteForm part = W1;
        part.values = d1.components[c];
        const Decomposition again = decompose_orthogonal(part, s.ops, s.betti);
        CHECK(s_norm(again.components[c] - part.values, S) <= 1e-7 * s_norm(part.values, S));
    }
}

TEST_CASE("structural zeros follow the topology")
{
    SUBCASE("disk has no harmonic fields")
    {
        const Setup s = setup("disk", 40);
        DiscreteForm W{1, SupportKind::tangential, random_vector(s.ops.tangential[1].size(), 2)};
        const Decomposition d = decompose_orthogonal(W, s.ops, s.betti);
        CHECK(d.components[normal_harmonic].cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.components[tangential_harmonic].cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.components[curly_gradient].cwiseAbs().maxCoeff() > 0.0);
        CHECK(d.reconstruction_residual <= 1e-8);
    }
    SUBCASE("solid double torus has no normal harmonic field")
    {
        const Setup s = setup("figure8_3d", 26);
        CHECK(s.betti[1] == 2);
        CHECK(s.betti[2] == 0);
        DiscreteForm W{1, SupportKind::tangential, random_vector(s.ops.tangential[1].size(), 4)};
        const Decomposition d = decompose_orthogonal(W, s.ops, s.betti);
        CHECK(d.components[normal_harmonic].cwiseAbs().maxCoeff() == 0.0);
        for (int c : {normal_gradient, tangential_curl, tangential_harmonic, curly_gradient}) {
            CAPTURE(component_names[c]);
            CHECK(d.gram(c, c) > 0.0);
        }
        CHECK(max_gram_ratio(d.gram) <= 1e-8);
        CHECK(d.reconstruction_residual <= 1e-8);
    }
    SUBCASE("shell carries only the normal harmonic field")
    {
        const Setup s = setup("shell", 16);
        DiscreteForm W{1, SupportKind::tangential, random_vector(s.ops.tangential[1].size(), 8)};
        const Decomposition d = decompose_orthogonal(W, s.ops, s.betti);
        CHECK(d.components[tangential_harmonic].cwiseAbs().maxCoeff() == 0.0);
        CHECK(d.gram(normal_harmonic, normal_harmonic) > 0.0);
        CHECK(d.augmented.size() == 1);
        CHECK(max_gram_ratio(d.gram) <= 1e-8);
    }
}

TEST_CASE("betti numbers that disagree with the operators are rejected")
{
    const Setup s = setup("annulus", 30);
    const DiscreteForm W = tangential_of(s, analytic_field("paper2d").total);
    BettiNumbers wrong = s.betti;
    wrong.values[0] = 2;
    CHECK_THROWS_AS(decompose_orthogonal(W, s.ops, wrong), TopologyError);
    wrong = s.betti;
    wrong.values[1] = 2;
    CHECK_THROWS_AS(decompose_orthogonal(W, s.ops, wrong), TopologyError);
    DiscreteForm normal_form{1, SupportKind::normal, Vector::Zero(s.ops.normal[1].size())};
    CHECK_THROWS_AS(decompose_orthogonal(normal_form, s.ops, s.betti), std::invalid_argument);
}
