#pragma once

#include "hodge/domain.hpp"

#include <string>

namespace hodge {

/// Restriction P_{k+1} D^I_k P_k^T of the grid incidence to two same-kind supports.
SparseMatrix project_differential(const SparseIncidence& incidence, const SupportSet& support_k,
                                  const SupportSet& support_k1);

/// Diagonal of the modified Hodge star on a support.
///
/// normal:     l^(m-k) / |sigma_k  intersect M|   (primal fractions)
/// tangential: |*sigma_k intersect M| / l^k        (dual fractions)
///
/// Support cells whose measured fraction is zero are floored at relative_floor * l^(measured
/// dimension).
Vector hodge_star(const FractionalVolumes& fractions, const SupportSet& support, double spacing,
                  int m, double relative_floor);

/// L = D_k^T S_{k+1} D_k + S_k D_{k-1} S_{k-1}^{-1} D_{k-1}^T S_k; a null pointer drops the
/// corresponding term. The result is symmetrized exactly.
SparseMatrix laplacian(const SparseMatrix* d_prev, const SparseMatrix* d_k, const Vector* s_prev,
                       const Vector& s_k, const Vector* s_next);

/// Unweighted graph Laplacian over the union of normal and tangential edges, columns on the
/// extended support, rows restricted to the normal vertices.
SparseMatrix graph_laplacian_extended(const CartesianComplex& complex, const SupportSet& extended0,
                                      const SupportSet& tangential_edges,
                                      const SupportSet& normal_edges, const SupportSet& normal0);

/// Inside dual vertices (m-cell lower corners) among those incident to a cell. These are the
/// sample points of the tangential discretization.
std::vector<MultiIndex> inside_dual_vertices(const LevelSetField& field, const Cell& cell);

/// Ids of the 2^(m-1) edges along `axis` of the m-cell with lower corner `top`.
std::vector<Index> parallel_edges(const CartesianComplex& complex, const MultiIndex& top, int axis);

/// Linear map from normal-support 1-forms to tangential-support 1-forms.
///
/// Edges in both supports are rescaled by l^(2-m) S_{1,n}; tangential-only edges evaluate the
/// Whitney reconstruction of the normal form at their inside dual sample points and apply the
/// tangential discretization rule there.
SparseMatrix build_conversion(const LevelSetField& field, const SupportSet& normal_edges,
                              const SupportSet& tangential_edges, const Vector& normal_star1);

/// Assembled operator family for one level-set field.
struct OperatorSet {
    int dim = 2;
    double spacing = 1.0;
    std::array<SupportSet, 4> normal;     // per degree 0..m
    std::array<SupportSet, 4> tangential; // per degree 0..m
    SupportSet extended0;
    std::array<SparseMatrix, 3> Dn; // degree k: normal (k+1)-cells x normal k-cells
    std::array<SparseMatrix, 3> Dt;
    std::array<Vector, 4> Sn;       // star diagonals
    std::array<Vector, 4> St;
    SparseMatrix L0E;               // normal vertices x extended vertices
    SparseMatrix conversion;        // C_{n->t}: tangential edges x normal edges
    SparseMatrix extended_to_tangential; // P_{E->T}: tangential vertices x extended vertices

    const SupportSet& support(SupportKind kind, int k) const
    {
        return kind == SupportKind::normal ? normal[k] : tangential[k];
    }
    const SparseMatrix& D(SupportKind kind, int k) const
    {
        return kind == SupportKind::normal ? Dn[k] : Dt[k];
    }
    const Vector& S(SupportKind kind, int k) const
    {
        return kind == SupportKind::normal ? Sn[k] : St[k];
    }

    /// Hodge Laplacian L_{k,kind}, assembled on demand.
    SparseMatrix laplacian(SupportKind kind, int k) const;

    /// Tangential codifferential delta_{k,t} = S_{k-1,t}^{-1} D_{k-1,t}^T S_{k,t} applied to x.
    Vector codifferential_t(int k, const Vector& x) const;
};

OperatorSet build_operators(const LevelSetField& field);

/// Matrix Market coordinate dump (real general).
void write_matrix_market(const std::string& path, const SparseMatrix& matrix);

} // namespace hodge
