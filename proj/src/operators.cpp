#include "hodge/operators.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace hodge {

SparseMatrix project_differential(const SparseIncidence& incidence, const SupportSet& support_k,
                                  const SupportSet& support_k1)
{
    if (support_k.kind != support_k1.kind) {
        throw std::invalid_argument("projected differential needs supports of the same kind");
    }
    if (support_k1.degree != support_k.degree + 1) {
        throw std::invalid_argument("projected differential needs consecutive degrees");
    }
    if (static_cast<Index>(support_k.included.size()) != incidence.cols() ||
        static_cast<Index>(support_k1.included.size()) != incidence.rows()) {
        throw std::invalid_argument("support sizes do not match the incidence matrix");
    }
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(incidence.nonZeros()));
    for (Index col = 0; col < incidence.outerSize(); ++col) {
        const Index lc = support_k.local[col];
        if (lc < 0) continue;
        for (SparseIncidence::InnerIterator it(incidence, col); it; ++it) {
            const Index lr = support_k1.local[it.row()];
            if (lr >= 0) entries.emplace_back(lr, lc, static_cast<double>(it.value()));
        }
    }
    SparseMatrix d(support_k1.size(), support_k.size());
    d.setFromTriplets(entries.begin(), entries.end());
    return d;
}

Vector hodge_star(const FractionalVolumes& fractions, const SupportSet& support, double spacing,
                  int m, double relative_floor)
{
    const int k = support.degree;
    if (fractions.degree != k) throw std::invalid_argument("fraction degree mismatch");
    if (support.kind == SupportKind::normal && fractions.side != Side::primal) {
        throw std::invalid_argument("normal stars use primal fractions");
    }
    if (support.kind == SupportKind::tangential && fractions.side != Side::dual) {
        throw std::invalid_argument("tangential stars use dual fractions");
    }
    const int measured = support.kind == SupportKind::normal ? k : m - k;
    const double full = std::pow(spacing, measured);
    const double floor = relative_floor * full;
    Vector s(support.size());
    for (Index i = 0; i < support.size(); ++i) {
        double f = fractions.values[support.cells[i]];
        if (f <= 0.0) f = floor;
        if (!std::isfinite(f)) throw std::logic_error("non-finite fractional volume");
        s[i] = support.kind == SupportKind::normal ? std::pow(spacing, m - k) / f
                                                   : f / std::pow(spacing, k);
    }
    return s;
}

SparseMatrix laplacian(const SparseMatrix* d_prev, const SparseMatrix* d_k, const Vector* s_prev,
                       const Vector& s_k, const Vector* s_next)
{
    const Index n = s_k.size();
    SparseMatrix out(n, n);
    if (d_k) {
        if (!s_next || d_k->cols() != n || d_k->rows() != s_next->size()) {
            throw std::invalid_argument("laplacian: upper term dimension mismatch");
        }
        const SparseMatrix sd = s_next->asDiagonal() * (*d_k);
        out = SparseMatrix(d_k->transpose() * sd);
    }
    if (d_prev) {
        if (!s_prev || d_prev->rows() != n || d_prev->cols() != s_prev->size()) {
            throw std::invalid_argument("laplacian: lower term dimension mismatch");
        }
        const SparseMatrix sd = s_k.asDiagonal() * (*d_prev);
        const Vector inv = s_prev->cwiseInverse();
        const SparseMatrix right = inv.asDiagonal() * SparseMatrix(sd.transpose());
        out += SparseMatrix(sd * right);
    }
    SparseMatrix sym = 0.5 * (out + SparseMatrix(out.transpose()));
    sym.prune(0.0);
    sym.makeCompressed();
    return sym;
}

SparseMatrix graph_laplacian_extended(const CartesianComplex& complex, const SupportSet& extended0,
                                      const SupportSet& tangential_edges,
                                      const SupportSet& normal_edges, const SupportSet& normal0)
{
    std::vector<Triplet> entries;
    for (Index e = 0; e < complex.cell_count(1); ++e) {
        if (!tangential_edges.contains(e) && !normal_edges.contains(e)) continue;
        const auto ends = complex.cell_vertices(complex.cell(1, e));
        const Index a = complex.vertex_id(ends[0]);
        const Index b = complex.vertex_id(ends[1]);
        const Index ea = extended0.local[a];
        const Index eb = extended0.local[b];
        if (ea < 0 || eb < 0) throw std::logic_error("edge endpoint missing from extended support");
        if (normal0.local[a] >= 0) {
            entries.emplace_back(normal0.local[a], ea, 1.0);
            entries.emplace_back(normal0.local[a], eb, -1.0);
        }
        if (normal0.local[b] >= 0) {
            entries.emplace_back(normal0.local[b], eb, 1.0);
            entries.emplace_back(normal0.local[b], ea, -1.0);
        }
    }
    SparseMatrix l(normal0.size(), extended0.size());
    l.setFromTriplets(entries.begin(), entries.end());
    return l;
}

std::vector<MultiIndex> inside_dual_vertices(const LevelSetField& field, const Cell& cell)
{
    const auto& cx = field.complex();
    std::vector<MultiIndex> out;
    for (const auto& t : cx.incident_top_cells(cell)) {
        if (field.center_inside(cx.top_cell_id(t))) out.push_back(t);
    }
    return out;
}

std::vector<Index> parallel_edges(const CartesianComplex& complex, const MultiIndex& top, int axis)
{
    std::vector<int> others;
    for (int a = 0; a < complex.dim(); ++a) {
        if (a != axis) others.push_back(a);
    }
    std::vector<Index> out;
    for (unsigned pattern = 0; pattern < (1u << others.size()); ++pattern) {
        Cell e{1u << axis, top};
        for (std::size_t j = 0; j < others.size(); ++j) {
            if ((pattern >> j) & 1u) e.index[others[j]] += 1;
        }
        out.push_back(complex.cell_id(e));
    }
    return out;
}

SparseMatrix build_conversion(const LevelSetField& field, const SupportSet& normal_edges,
                              const SupportSet& tangential_edges, const Vector& normal_star1)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    const double l = cx.spacing();
    const double rescale = std::pow(l, 2 - m);
    const double per_edge = 1.0 / static_cast<double>(1 << (m - 1));
    std::vector<Triplet> entries;
    for (Index t = 0; t < tangential_edges.size(); ++t) {
        const Index e = tangential_edges.cells[t];
        const Index n = normal_edges.local[e];
        if (n >= 0) {
            entries.emplace_back(t, n, rescale * normal_star1[n]);
            continue;
        }
        const Cell edge = cx.cell(1, e);
        int axis = 0;
        while (!edge.spans(axis)) ++axis;
        const auto samples = inside_dual_vertices(field, edge);
        // l * mean over samples of (mean over parallel edges of W / l)
        const double weight = per_edge / static_cast<double>(samples.size());
        for (const auto& top : samples) {
            for (Index pe : parallel_edges(cx, top, axis)) {
                const Index pn = normal_edges.local[pe];
                if (pn >= 0) entries.emplace_back(t, pn, weight);
            }
        }
    }
    SparseMatrix c(tangential_edges.size(), normal_edges.size());
    c.setFromTriplets(entries.begin(), entries.end());
    return c;
}

SparseMatrix OperatorSet::laplacian(SupportKind kind, int k) const
{
    if (k < 0 || k > dim) throw std::invalid_argument("laplacian degree out of range");
    const auto& d = kind == SupportKind::normal ? Dn : Dt;
    const auto& s = kind == SupportKind::normal ? Sn : St;
    const SparseMatrix* d_prev = k > 0 ? &d[k - 1] : nullptr;
    const SparseMatrix* d_k = k < dim ? &d[k] : nullptr;
    const Vector* s_prev = k > 0 ? &s[k - 1] : nullptr;
    const Vector* s_next = k < dim ? &s[k + 1] : nullptr;
    return hodge::laplacian(d_prev, d_k, s_prev, s[k], s_next);
}

Vector OperatorSet::codifferential_t(int k, const Vector& x) const
{
    if (k < 1 || k > dim) throw std::invalid_argument("codifferential degree out of range");
    if (x.size() != St[k].size()) throw std::invalid_argument("codifferential size mismatch");
    return (Dt[k - 1].transpose() * St[k].cwiseProduct(x)).cwiseQuotient(St[k - 1]);
}

OperatorSet build_operators(const LevelSetField& field)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    OperatorSet ops;
    ops.dim = m;
    ops.spacing = cx.spacing();
    for (int k = 0; k <= m; ++k) {
        ops.normal[k] = build_support(field, SupportKind::normal, k);
        ops.tangential[k] = build_support(field, SupportKind::tangential, k);
    }
    ops.extended0 = build_support(field, SupportKind::extended0, 0);
    for (int k = 0; k < m; ++k) {
        const SparseIncidence d = cx.incidence(k);
        ops.Dn[k] = project_differential(d, ops.normal[k], ops.normal[k + 1]);
        ops.Dt[k] = project_differential(d, ops.tangential[k], ops.tangential[k + 1]);
    }
    const double floor = field.relative_floor();
    for (int k = 0; k <= m; ++k) {
        ops.Sn[k] = hodge_star(fractional_volume(field, k, Side::primal), ops.normal[k],
                               cx.spacing(), m, floor);
        ops.St[k] = hodge_star(fractional_volume(field, k, Side::dual), ops.tangential[k],
                               cx.spacing(), m, floor);
    }
    ops.L0E = graph_laplacian_extended(cx, ops.extended0, ops.tangential[1], ops.normal[1],
                                       ops.normal[0]);
    ops.conversion = build_conversion(field, ops.normal[1], ops.tangential[1], ops.Sn[1]);

    std::vector<Triplet> sel;
    for (Index t = 0; t < ops.tangential[0].size(); ++t) {
        const Index e = ops.extended0.local[ops.tangential[0].cells[t]];
        if (e < 0) throw std::logic_error("tangential vertex missing from extended support");
        sel.emplace_back(t, e, 1.0);
    }
    ops.extended_to_tangential.resize(ops.tangential[0].size(), ops.extended0.size());
    ops.extended_to_tangential.setFromTriplets(sel.begin(), sel.end());
    return ops;
}

void write_matrix_market(const std::string& path, const SparseMatrix& matrix)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Index col = 0; col < matrix.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

} // namespace hodge
