#include "hodge/grid.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace hodge;

namespace {

Eigen::MatrixXi dense(const SparseIncidence& d) { return Eigen::MatrixXi(d); }

} // namespace

TEST_CASE("cell counts of small complexes")
{
    const auto a = build_complex(2, {2, 2}, 1.0, {0.0, 0.0});
    CHECK(a.cell_count(0) == 4);
    CHECK(a.cell_count(1) == 4);
    CHECK(a.cell_count(2) == 1);

    const auto b = build_complex(3, {3, 3, 3}, 0.5, {0.0, 0.0, 0.0});
    CHECK(b.cell_count(0) == 27);
    CHECK(b.cell_count(1) == 54);
    CHECK(b.cell_count(2) == 36);
    CHECK(b.cell_count(3) == 8);

    const auto c = build_complex(2, {5, 4}, 1.0, {0.0, 0.0});
    CHECK(c.cell_count(1) == 4 * 4 + 5 * 3);
}

TEST_CASE("invalid complexes are rejected")
{
    CHECK_THROWS_AS(build_complex(2, {1, 5}, 1.0, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_complex(4, {2, 2, 2, 2}, 1.0, {0, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(build_complex(2, {3, 3}, 0.0, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_complex(2, {3, 3}, -1.0, {0.0, 0.0}), std::invalid_argument);
    const auto g = build_complex(2, {3, 3}, 1.0, {0.0, 0.0});
    CHECK_THROWS(g.incidence(2));
    CHECK_THROWS(g.incidence(-1));
}

TEST_CASE("cell id round trip")
{
    const auto g = build_complex(3, {4, 5, 3}, 0.25, {1.0, -2.0, 0.5});
    for (int k = 0; k <= 3; ++k) {
        for (Index id = 0; id < g.cell_count(k); ++id) {
            const Cell c = g.cell(k, id);
            CHECK(popcount(c.axes) == k);
            REQUIRE(g.cell_id(c) == id);
        }
    }
}

TEST_CASE("single face boundary circulates counterclockwise")
{
    const auto g = build_complex(2, {2, 2}, 1.0, {0.0, 0.0});
    const Eigen::MatrixXi d = dense(g.incidence(1));
    REQUIRE(d.rows() == 1);
    const Index bottom = g.cell_id(Cell{0b01u, {0, 0, 0}});
    const Index top = g.cell_id(Cell{0b01u, {0, 1, 0}});
    const Index left = g.cell_id(Cell{0b10u, {0, 0, 0}});
    const Index right = g.cell_id(Cell{0b10u, {1, 0, 0}});
    CHECK(d(0, bottom) == 1);
    CHECK(d(0, right) == 1);
    CHECK(d(0, top) == -1);
    CHECK(d(0, left) == -1);
}

TEST_CASE("gradient stencil has one head and one tail per edge")
{
    const auto g = build_complex(2, {3, 3}, 1.0, {0.0, 0.0});
    const Eigen::MatrixXi d = dense(g.incidence(0));
    for (Index r = 0; r < d.rows(); ++r) {
        int plus = 0, minus = 0;
        for (Index c = 0; c < d.cols(); ++c) {
            plus += d(r, c) == 1;
            minus += d(r, c) == -1;
        }
        CHECK(plus == 1);
        CHECK(minus == 1);
    }
}

TEST_CASE("incidence rows carry 2(k+1) nonzeros and compose to zero")
{
    const std::vector<CartesianComplex> grids{build_complex(2, {5, 4}, 1.0, {0.0, 0.0}),
                                              build_complex(3, {4, 5, 3}, 1.0, {0.0, 0.0, 0.0}),
                                              build_complex(3, {4, 4, 4}, 1.0, {0.0, 0.0, 0.0})};
    for (const auto& g : grids) {
        for (int k = 0; k < g.dim(); ++k) {
            const SparseIncidence d = g.incidence(k);
            Eigen::VectorXi per_row = Eigen::VectorXi::Zero(d.rows());
            for (Index c = 0; c < d.outerSize(); ++c) {
                for (SparseIncidence::InnerIterator it(d, c); it; ++it) ++per_row[it.row()];
            }
            CHECK((per_row.array() == 2 * (k + 1)).all());
        }
        for (int k = 0; k + 1 < g.dim(); ++k) {
            const SparseIncidence prod = g.incidence(k + 1) * g.incidence(k);
            int nonzero = 0;
            for (Index c = 0; c < prod.outerSize(); ++c) {
                for (SparseIncidence::InnerIterator it(prod, c); it; ++it) nonzero += it.value() != 0;
            }
            CHECK(nonzero == 0);
        }
    }
}

TEST_CASE("dual incidence is the signed transpose of primal incidence")
{
    // Dual (m-k-1)-cell of a primal (k+1)-cell sits at its center; its boundary consists of the
    // dual cells of the cofaces. Brute force: the primal k-cell sigma is a face of tau exactly
    // when tau's center is a neighbour of sigma's center at half spacing along one axis.
    const auto g = build_complex(3, {3, 3, 3}, 1.0, {0.0, 0.0, 0.0});
    for (int k = 0; k < 3; ++k) {
        const Eigen::MatrixXi d = dense(g.incidence(k));
        for (Index r = 0; r < d.rows(); ++r) {
            const Point ct = g.center(g.cell(k + 1, r));
            for (Index c = 0; c < d.cols(); ++c) {
                const Point cs = g.center(g.cell(k, c));
                const Point diff = (ct - cs).cwiseAbs();
                const int half = (diff.array() > 0.25).count();
                const bool adjacent = half == 1 && (diff.maxCoeff() - 0.5) < 1e-12;
                CHECK((d(r, c) != 0) == adjacent);
            }
        }
    }
}

TEST_CASE("builds are deterministic")
{
    const auto a = build_complex(3, {4, 5, 3}, 0.3, {0.0, 0.0, 0.0});
    const auto b = build_complex(3, {4, 5, 3}, 0.3, {0.0, 0.0, 0.0});
    CHECK(a == b);
    for (int k = 0; k < 3; ++k) {
        const SparseIncidence da = a.incidence(k);
        const SparseIncidence db = b.incidence(k);
        REQUIRE(da.nonZeros() == db.nonZeros());
        CHECK(std::equal(da.valuePtr(), da.valuePtr() + da.nonZeros(), db.valuePtr()));
        CHECK(std::equal(da.innerIndexPtr(), da.innerIndexPtr() + da.nonZeros(),
                         db.innerIndexPtr()));
    }
}

TEST_CASE("dual vertices are offset by half a cell")
{
    const auto g = build_complex(2, {3, 4}, 0.5, {1.0, 2.0});
    const Point c = g.center(Cell{g.full_mask(), {1, 2, 0}});
    CHECK(c.x() == doctest::Approx(1.0 + 0.5 + 0.25));
    CHECK(c.y() == doctest::Approx(2.0 + 1.0 + 0.25));
}
