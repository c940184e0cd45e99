#pragma once

#include "hodge/common.hpp"

#include <optional>
#include <vector>

namespace hodge {

/// A k-cell of the grid: the set of axes it spans (bitmask) and the multi-index of its
/// lowest vertex.
struct Cell {
    unsigned axes = 0;
    MultiIndex index{0, 0, 0};

    bool spans(int axis) const { return (axes >> axis) & 1u; }
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Number of axes spanned by a bitmask.
inline int popcount(unsigned mask) { return __builtin_popcount(mask); }

/// Sparse signed incidence matrix with entries in {-1, 0, +1}.
using SparseIncidence = Eigen::SparseMatrix<int>;

///
/// Rectangular Cartesian cell complex with uniform spacing.
///
/// k-cells are enumerated axis-subset major (subsets in lexicographic order of their sorted
/// axis lists), then row-major over the multi-index with the last axis fastest. A k-cell is
/// oriented by the increasing order of the axes it spans.
///
/// Dual vertices are the centers of the m-cells; the dual grid is never built explicitly.
///
class CartesianComplex {
public:
    CartesianComplex(int dimension, std::vector<Index> vertex_counts, double spacing,
                     std::vector<double> origin);

    int dim() const { return dim_; }
    double spacing() const { return spacing_; }
    Index vertex_count(int axis) const { return counts_[axis]; }
    double origin(int axis) const { return origin_[axis]; }
    const MultiIndex& vertex_counts() const { return counts_; }

    Index cell_count(int k) const { return total_[k]; }

    /// Axis subsets of size k, in enumeration order.
    const std::vector<unsigned>& subsets(int k) const { return subsets_[k]; }

    /// Per-axis extent of the multi-index range for cells spanning `axes`.
    MultiIndex extents(unsigned axes) const;

    Cell cell(int k, Index id) const;
    Index cell_id(const Cell& c) const;

    /// Id of the cell, or nothing when the multi-index is outside the grid.
    std::optional<Index> find(const Cell& c) const;

    Index vertex_id(const MultiIndex& v) const { return cell_id(Cell{0u, v}); }

    /// Id of the m-cell (dual vertex) with the given lower corner.
    Index top_cell_id(const MultiIndex& c) const { return cell_id(Cell{full_mask(), c}); }

    unsigned full_mask() const { return (1u << dim_) - 1u; }

    /// Position of a grid vertex.
    Point vertex_position(const MultiIndex& v) const;

    /// Center of a cell; for m-cells this is the dual vertex.
    Point center(const Cell& c) const;

    /// The 2^k vertices of a cell, ordered by the binary offset pattern over its spanned axes
    /// (first spanned axis is the least significant bit).
    std::vector<MultiIndex> cell_vertices(const Cell& c) const;

    /// Lower corners of the existing m-cells incident to a cell (its dual vertices), in
    /// binary offset order over the axes the cell does not span.
    std::vector<MultiIndex> incident_top_cells(const Cell& c) const;

    /// Signed incidence between (k+1)-cells (rows) and k-cells (columns).
    SparseIncidence incidence(int k) const;

    friend bool operator==(const CartesianComplex& a, const CartesianComplex& b)
    {
        return a.dim_ == b.dim_ && a.counts_ == b.counts_ && a.spacing_ == b.spacing_ &&
               a.origin_ == b.origin_;
    }

private:
    int dim_;
    MultiIndex counts_{1, 1, 1};
    double spacing_;
    std::array<double, 3> origin_{0.0, 0.0, 0.0};
    std::array<std::vector<unsigned>, 4> subsets_;
    std::array<std::vector<Index>, 4> offsets_; // per degree, per subset
    std::array<Index, 4> total_{0, 0, 0, 0};
};

CartesianComplex build_complex(int dimension, const std::vector<Index>& vertex_counts,
                               double spacing, const std::vector<double>& origin);

/// Convenience overload: incidence matrix D^I_k of the complex.
inline SparseIncidence incidence(const CartesianComplex& complex, int k)
{
    return complex.incidence(k);
}

} // namespace hodge
