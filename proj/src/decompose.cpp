#include "hodge/decompose.hpp"
#include "hodge/fraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace hodge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int edge_axis(const Cell& edge)
{
    int axis = 0;
    while (!edge.spans(axis)) ++axis;
    return axis;
}

void check_samples(const VectorFieldSamples& samples, const CartesianComplex& cx)
{
    if (samples.dim != cx.dim() || samples.primal.rows() != cx.cell_count(0) ||
        samples.dual.rows() != cx.cell_count(cx.dim()) || samples.primal.cols() != cx.dim() ||
        samples.dual.cols() != cx.dim() ||
        (!samples.dual_defined.empty() &&
         static_cast<Index>(samples.dual_defined.size()) != samples.dual.rows())) {
        throw std::invalid_argument("vector field samples do not match the complex");
    }
}

} // namespace

VectorFieldSamples sample_field(const LevelSetField& field, const VectorFunction& f,
                                SampleExtent extent)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    VectorFieldSamples out;
    out.dim = m;
    out.primal = Matrix::Zero(cx.cell_count(0), m);
    out.dual = Matrix::Zero(cx.cell_count(m), m);
    for (Index v = 0; v < out.primal.rows(); ++v) {
        if (!field.vertex_inside(v)) continue;
        out.primal.row(v) = f(cx.vertex_position(cx.cell(0, v).index)).head(m).transpose();
    }
    if (extent == SampleExtent::extended) {
        out.dual_defined.assign(static_cast<std::size_t>(out.dual.rows()), 0);
    }
    for (Index c = 0; c < out.dual.rows(); ++c) {
        const bool inside = field.center_inside(c);
        if (!inside && extent == SampleExtent::inside) continue;
        const Point x = f(cx.center(cx.cell(m, c)));
        if (!inside && !x.head(m).allFinite()) continue;
        out.dual.row(c) = x.head(m).transpose();
        if (extent == SampleExtent::extended) out.dual_defined[c] = 1;
    }
    if (!out.primal.allFinite() || !out.dual.allFinite()) {
        throw std::invalid_argument("vector field is not finite at every inside grid point");
    }
    return out;
}

VectorFieldSamples samples_from_primal(const LevelSetField& field, const Matrix& primal)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    if (primal.rows() != cx.cell_count(0) || primal.cols() != m) {
        throw std::invalid_argument("vector field array has the wrong shape");
    }
    if (!primal.allFinite()) throw std::invalid_argument("vector field samples must be finite");
    VectorFieldSamples out;
    out.dim = m;
    out.primal = Matrix::Zero(primal.rows(), m);
    for (Index v = 0; v < primal.rows(); ++v)
        if (field.vertex_inside(v)) out.primal.row(v) = primal.row(v);
    out.dual = Matrix::Zero(cx.cell_count(m), m);
    for (Index c = 0; c < out.dual.rows(); ++c) {
        if (!field.center_inside(c)) continue;
        int inside = 0;
        for (const auto& corner : cx.cell_vertices(cx.cell(m, c))) {
            const Index v = cx.vertex_id(corner);
            if (!field.vertex_inside(v)) continue;
            out.dual.row(c) += out.primal.row(v);
            ++inside;
        }
        if (inside > 0) out.dual.row(c) /= static_cast<double>(inside);
    }
    return out;
}

DiscreteForm discretize_normal(const VectorFieldSamples& samples, const LevelSetField& field,
                               const SupportSet& normal_edges)
{
    const auto& cx = field.complex();
    check_samples(samples, cx);
    if (normal_edges.kind != SupportKind::normal || normal_edges.degree != 1) {
        throw std::invalid_argument("discretize_normal needs the normal edge support");
    }
    const double l = cx.spacing();
    DiscreteForm out{1, SupportKind::normal, Vector::Zero(normal_edges.size())};
    for (Index i = 0; i < normal_edges.size(); ++i) {
        const Cell e = cx.cell(1, normal_edges.cells[i]);
        const int a = edge_axis(e);
        const auto ends = cx.cell_vertices(e);
        const Index v0 = cx.vertex_id(ends[0]);
        const Index v1 = cx.vertex_id(ends[1]);
        double sum = 0.0;
        int inside = 0;
        for (Index v : {v0, v1}) {
            if (field.vertex_inside(v)) {
                sum += samples.primal(v, a);
                ++inside;
            }
        }
        if (inside == 0) continue;
        const double length = fraction::segment(field.primal()[v0], field.primal()[v1]) * l;
        out.values[i] = sum / inside * length;
    }
    return out;
}

DiscreteForm discretize_tangential(const VectorFieldSamples& samples, const LevelSetField& field,
                                   const SupportSet& tangential_edges)
{
    const auto& cx = field.complex();
    check_samples(samples, cx);
    if (tangential_edges.kind != SupportKind::tangential || tangential_edges.degree != 1) {
        throw std::invalid_argument("discretize_tangential needs the tangential edge support");
    }
    const double l = cx.spacing();
    DiscreteForm out{1, SupportKind::tangential, Vector::Zero(tangential_edges.size())};
    for (Index i = 0; i < tangential_edges.size(); ++i) {
        const Cell e = cx.cell(1, tangential_edges.cells[i]);
        const int a = edge_axis(e);
        double sum = 0.0;
        int count = 0;
        if (samples.dual_defined.empty()) {
            for (const auto& t : inside_dual_vertices(field, e)) {
                sum += samples.dual(cx.top_cell_id(t), a);
                ++count;
            }
        } else {
            for (const auto& t : cx.incident_top_cells(e)) {
                const Index c = cx.top_cell_id(t);
                if (!samples.dual_defined[c]) continue;
                sum += samples.dual(c, a);
                ++count;
            }
        }
        if (count > 0) out.values[i] = l * sum / count;
    }
    return out;
}

Point whitney_reconstruct(const CartesianComplex& complex, const SupportSet& support,
                          const DiscreteForm& form, const Point& point)
{
    if (form.degree != 1 || support.degree != 1 || form.kind != support.kind ||
        form.values.size() != support.size()) {
        throw std::invalid_argument("whitney_reconstruct: form does not match its support");
    }
    const int m = complex.dim();
    const double l = complex.spacing();
    MultiIndex cell{0, 0, 0};
    std::array<double, 3> t{0.0, 0.0, 0.0};
    for (int a = 0; a < m; ++a) {
        const double s = (point[a] - complex.origin(a)) / l;
        const double top = static_cast<double>(complex.vertex_count(a) - 1);
        if (!(s >= -1e-12 && s <= top + 1e-12)) {
            throw std::out_of_range("whitney_reconstruct: point outside the grid box");
        }
        const Index c = std::clamp<Index>(static_cast<Index>(std::floor(s)), 0,
                                          complex.vertex_count(a) - 2);
        cell[a] = c;
        t[a] = s - static_cast<double>(c);
    }
    Point out = Point::Zero();
    for (int a = 0; a < m; ++a) {
        std::vector<int> others;
        for (int b = 0; b < m; ++b)
            if (b != a) others.push_back(b);
        const auto edges = parallel_edges(complex, cell, a);
        double value = 0.0;
        for (std::size_t p = 0; p < edges.size(); ++p) {
            double w = 1.0;
            for (std::size_t j = 0; j < others.size(); ++j) {
                const double tj = t[others[j]];
                w *= ((p >> j) & 1u) ? tj : 1.0 - tj;
            }
            const Index local = support.local[edges[p]];
            if (local >= 0 && w != 0.0) value += w * form.values[local] / l;
        }
        out[a] = value;
    }
    return out;
}

Components vertex_components(const SparseMatrix& d0)
{
    const Index n = d0.cols();
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Index x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    const SparseMatrix rows = d0.transpose(); // column per edge
    for (Index e = 0; e < rows.outerSize(); ++e) {
        Index first = -1;
        for (SparseMatrix::InnerIterator it(rows, e); it; ++it) {
            if (first < 0) {
                first = it.row();
                continue;
            }
            const Index a = find(first);
            const Index b = find(it.row());
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    Components out;
    out.label.assign(static_cast<std::size_t>(n), -1);
    std::vector<Index> root_label(static_cast<std::size_t>(n), -1);
    for (Index v = 0; v < n; ++v) {
        const Index r = find(v);
        if (root_label[r] < 0) {
            root_label[r] = out.count++;
            out.lowest.push_back(v);
        }
        out.label[v] = root_label[r];
    }
    return out;
}

Matrix gram_matrix(const std::array<Vector, 5>& components, const Vector& St1)
{
    Matrix g(5, 5);
    for (int i = 0; i < 5; ++i) {
        if (components[i].size() != St1.size()) {
            throw std::invalid_argument("gram_matrix: component not on the tangential support");
        }
        for (int j = 0; j <= i; ++j) {
            g(i, j) = g(j, i) = components[i].dot(St1.cwiseProduct(components[j]));
        }
    }
    return g;
}

namespace {

void finalize(Decomposition& d, const Vector& St1)
{
    d.gram = gram_matrix(d.components, St1);
    Vector sum = Vector::Zero(d.input.size());
    for (const auto& c : d.components) sum += c;
    const double norm = std::sqrt(d.input.dot(St1.cwiseProduct(d.input)));
    const Vector r = d.input - sum;
    const double rn = std::sqrt(r.dot(St1.cwiseProduct(r)));
    d.reconstruction_residual = norm > 0.0 ? rn / norm : rn;
}

// Kernel basis of L x = lambda S x with its dimension checked against the expected one.
Matrix kernel_basis(const SparseMatrix& L, const Vector& S, Index expected, const char* what,
                    const SolverSettings& settings)
{
    if (expected == 0) return Matrix(L.rows(), 0);
    const Index count = std::min<Index>(L.rows(), expected + 1);
    const EigenResult eig = smallest_eigs(L, S, count, settings);
    if (eig.kernel_dimension != expected) {
        throw TopologyError(std::string("dim ker ") + what + " = " +
                            std::to_string(eig.kernel_dimension) +
                            " but the Betti numbers require " + std::to_string(expected));
    }
    return eig.vectors.leftCols(expected);
}

// L_t[2] solver; in 3D the beta_2 kernel is removed by diagonal augmentation at the largest
// entry of each kernel vector.
SpsdSolver face_solver(const OperatorSet& ops, const BettiNumbers& betti,
                       const SolverSettings& settings, std::vector<Index>& augmented)
{
    const SparseMatrix L2 = ops.laplacian(SupportKind::tangential, 2);
    const Index beta2 = ops.dim == 3 ? betti[2] : 0;
    const Matrix h = kernel_basis(L2, ops.St[2], beta2, "L_t[2]", settings);
    augmented.clear();
    for (Index j = 0; j < h.cols(); ++j) {
        Vector mag = h.col(j).cwiseAbs();
        for (Index used : augmented) mag[used] = -1.0;
        Index idx = 0;
        mag.maxCoeff(&idx);
        augmented.push_back(idx);
    }
    return SpsdSolver(L2, pin_kernel(L2, augmented, PinMode::augment, beta2,
                                     settings.augmentation_alpha),
                      settings);
}

// Right-hand side A^T (w .* v) with the magnitude |A|^T |w .* v| it has before cancellation.
std::pair<Vector, double> weighted_rhs(const SparseMatrix& A, const Vector& w, const Vector& v)
{
    const Vector wv = w.cwiseProduct(v);
    return {A.transpose() * wv, (A.cwiseAbs().transpose() * wv.cwiseAbs()).norm()};
}

// Residuals are measured against the pre-cancellation scale so that right-hand sides which
// cancel to roundoff (a curl fed to the vertex solve) are not rejected.
Vector run(const SpsdSolver& solver, const std::pair<Vector, double>& rhs,
           const std::string& label, std::vector<SolveReport>& reports)
{
    SolveReport rep;
    Vector x = solver.solve(rhs.first, &rep, rhs.second);
    rep.label = label;
    reports.push_back(rep);
    return x;
}

// S_t[2] D_t[1] W
std::pair<Vector, double> face_rhs(const OperatorSet& ops, const Vector& W)
{
    const SparseMatrix A = SparseMatrix(ops.St[2].asDiagonal() * ops.Dt[1]).transpose();
    return weighted_rhs(A, Vector::Ones(W.size()), W);
}

} // namespace

Decomposition decompose_direct(const DiscreteForm& Wn, const DiscreteForm& Wt,
                               const OperatorSet& ops, const BettiNumbers& betti,
                               const SolverSettings& settings)
{
    if (Wn.kind != SupportKind::normal || Wn.values.size() != ops.normal[1].size() ||
        Wt.kind != SupportKind::tangential || Wt.values.size() != ops.tangential[1].size()) {
        throw std::invalid_argument("decompose_direct: forms do not match the operator supports");
    }
    const int m = ops.dim;
    Decomposition d;
    d.mode = "direct";
    d.betti = betti;
    d.input = Wt.values;
    auto start = Clock::now();

    const SparseMatrix L0n = ops.laplacian(SupportKind::normal, 0);
    const SpsdSolver normal0(L0n, settings);
    d.potential_t = run(normal0, weighted_rhs(ops.Dn[0], ops.Sn[1], Wn.values),
                        "L_n[0] A_n", d.reports);
    const SpsdSolver faces = face_solver(ops, betti, settings, d.augmented);
    d.potential_b = run(faces, face_rhs(ops, Wt.values), "L_t[2] B_t",
                        d.reports);
    d.timing.emplace_back("potentials", seconds_since(start));

    start = Clock::now();
    d.normal_harmonic_basis = kernel_basis(ops.laplacian(SupportKind::normal, 1), ops.Sn[1],
                                           betti[m - 1], "L_n[1]", settings);
    d.tangential_harmonic_basis = kernel_basis(ops.laplacian(SupportKind::tangential, 1),
                                               ops.St[1], betti[1], "L_t[1]", settings);
    d.timing.emplace_back("harmonic_bases", seconds_since(start));

    const auto& H = d.normal_harmonic_basis;
    const auto& Ht = d.tangential_harmonic_basis;
    const Vector Nh = H * (H.transpose() * ops.Sn[1].cwiseProduct(Wn.values));
    const Vector Th = Ht * (Ht.transpose() * ops.St[1].cwiseProduct(Wt.values));
    d.components[normal_gradient] = ops.conversion * (ops.Dn[0] * d.potential_t);
    d.components[tangential_curl] = ops.codifferential_t(2, d.potential_b);
    d.components[normal_harmonic] = ops.conversion * Nh;
    d.components[tangential_harmonic] = Th;
    d.components[curly_gradient] = Wt.values - d.components[normal_gradient] -
                                   d.components[tangential_curl] -
                                   d.components[normal_harmonic] - Th;
    finalize(d, ops.St[1]);
    return d;
}

Decomposition decompose_orthogonal(const DiscreteForm& Wt, const OperatorSet& ops,
                                   const BettiNumbers& betti, const SolverSettings& settings)
{
    if (Wt.kind != SupportKind::tangential || Wt.values.size() != ops.tangential[1].size()) {
        throw std::invalid_argument("decompose_orthogonal: form is not on the tangential support");
    }
    const int m = ops.dim;
    const Vector& S1 = ops.St[1];
    const SparseMatrix& D0 = ops.Dt[0];
    Decomposition d;
    d.mode = "orthogonal";
    d.betti = betti;
    d.input = Wt.values;

    // 1. tangential potentials
    auto start = Clock::now();
    const Components comps = vertex_components(D0);
    if (comps.count != betti[0]) {
        throw TopologyError("tangential support has " + std::to_string(comps.count) +
                            " connected components but beta_0 = " + std::to_string(betti[0]));
    }
    d.pins = comps.lowest;
    const SparseMatrix L0t = ops.laplacian(SupportKind::tangential, 0);
    const SpsdSolver vertex(L0t, pin_kernel(L0t, d.pins, PinMode::pin, betti[0]), settings);
    d.potential_t = run(vertex, weighted_rhs(D0, S1, Wt.values), "L_t[0] A_t",
                        d.reports);
    {
        // released before the KKT factorization so only one large factor is alive at a time
        const SpsdSolver faces = face_solver(ops, betti, settings, d.augmented);
        d.potential_b = run(faces, face_rhs(ops, Wt.values), "L_t[2] B_t",
                            d.reports);
    }
    d.timing.emplace_back("tangential_potentials", seconds_since(start));

    // 2. tangential harmonic part by subtraction
    const Vector gradient = D0 * d.potential_t;
    d.components[tangential_curl] = ops.codifferential_t(2, d.potential_b);
    if (betti[1] == 0) {
        d.components[tangential_harmonic] = Vector::Zero(Wt.values.size());
    } else {
        d.components[tangential_harmonic] =
            Wt.values - gradient - d.components[tangential_curl];
    }

    // harmonic-exact projection: min ||D0 P A - target||_S1 s.t. L0E A = 0
    start = Clock::now();
    const SparseMatrix& P = ops.extended_to_tangential;
    const SparseMatrix M = SparseMatrix(P.transpose() * L0t * P);
    std::vector<Index> weak;
    {
        std::vector<std::uint8_t> in_t(static_cast<std::size_t>(ops.extended0.size()), 0);
        for (Index c = 0; c < P.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(P, c); it; ++it) in_t[it.col()] = 1;
        for (Index i = 0; i < ops.extended0.size(); ++i)
            if (!in_t[i]) weak.push_back(i);
    }
    std::vector<Index> extended_pins;
    for (Index p : d.pins) {
        extended_pins.push_back(ops.extended0.local[ops.tangential[0].cells[p]]);
    }
    const SaddleSolver saddle(M, ops.L0E, extended_pins, weak, settings);
    d.timing.emplace_back("kkt_factorization", seconds_since(start));
    auto project = [&](const Vector& potential, const std::string& label) {
        auto sol = saddle.solve(P.transpose() * (L0t * potential));
        sol.report.label = label;
        d.reports.push_back(sol.report);
        return sol.primal;
    };

    // 3. normal harmonic basis carried to the tangential support
    start = Clock::now();
    const Index beta_n = betti[m - 1];
    const Matrix Nbasis = kernel_basis(ops.laplacian(SupportKind::normal, 1), ops.Sn[1], beta_n,
                                       "L_n[1]", settings);
    Matrix projected(S1.size(), beta_n);
    for (Index i = 0; i < beta_n; ++i) {
        const Vector closest = ops.conversion * Nbasis.col(i);
        const Vector abar = run(vertex, weighted_rhs(D0, S1, closest),
                                "L_t[0] Abar_h" + std::to_string(i), d.reports);
        const Vector a = project(abar, "KKT Abar_h" + std::to_string(i));
        projected.col(i) = D0 * (P * a);
    }
    const auto ortho = gram_schmidt_S(projected, S1);
    if (static_cast<Index>(ortho.basis.cols()) != beta_n) {
        throw TopologyError("normal harmonic basis lost rank after projection");
    }
    d.normal_harmonic_basis = ortho.basis;
    d.timing.emplace_back("normal_harmonic_basis", seconds_since(start));

    // 4. exact-harmonic content of the gradient part
    start = Clock::now();
    d.potential_extended = project(d.potential_t, "KKT A");
    const Vector harmonic_exact = D0 * (P * d.potential_extended);
    d.timing.emplace_back("gradient_projection", seconds_since(start));

    // 5. split
    const Matrix& H = d.normal_harmonic_basis;
    d.components[normal_harmonic] = H * (H.transpose() * S1.cwiseProduct(harmonic_exact));
    d.components[curly_gradient] = harmonic_exact - d.components[normal_harmonic];
    d.components[normal_gradient] = gradient - harmonic_exact;
    finalize(d, S1);
    return d;
}

} // namespace hodge
