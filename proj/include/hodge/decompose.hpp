#pragma once

#include "hodge/linalg.hpp"
#include "hodge/operators.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace hodge {

/// Pointwise vector field: one m-vector per primal vertex and per dual vertex (m-cell
/// center), zero at points outside M. Rows are points, columns components.
struct VectorFieldSamples {
    int dim = 2;
    Matrix primal;
    Matrix dual;
    // Dual points carrying a sample. Empty means the dual points inside M.
    std::vector<std::uint8_t> dual_defined;
};

/// inside: samples at points of M only. extended: an analytic field is also evaluated at dual
/// points outside M wherever it is finite, so boundary edges average all their incident
/// cell centers.
enum class SampleExtent { inside, extended };

using VectorFunction = std::function<Point(const Point&)>;

/// Evaluates an analytic field at the primal and dual points inside M; outside points are 0,
/// so the field may be singular outside the domain.
VectorFieldSamples sample_field(const LevelSetField& field, const VectorFunction& f,
                                SampleExtent extent = SampleExtent::inside);

/// Keeps the inside primal samples; an inside dual point gets the mean of its cell's inside
/// corners.
VectorFieldSamples samples_from_primal(const LevelSetField& field, const Matrix& primal);

/// A k-cochain restricted to a support, one value per included cell in local order.
struct DiscreteForm {
    int degree = 1;
    SupportKind kind = SupportKind::tangential;
    Vector values;
};

/// Per normal edge: mean edge-direction component over inside endpoints times |e ∩ M|.
DiscreteForm discretize_normal(const VectorFieldSamples& samples, const LevelSetField& field,
                               const SupportSet& normal_edges);

/// Per tangential edge: l times the mean edge-direction component over the inside centers of
/// the m-cells incident to the edge (over all defined incident centers for extended samples).
DiscreteForm discretize_tangential(const VectorFieldSamples& samples, const LevelSetField& field,
                                   const SupportSet& tangential_edges);

/// Whitney-type reconstruction of a 1-form at a point of the grid box: per axis, the edge
/// averages (value / l) of the containing cell's parallel edges, interpolated multilinearly
/// in the transverse coordinates. Edges outside the support contribute 0.
Point whitney_reconstruct(const CartesianComplex& complex, const SupportSet& support,
                          const DiscreteForm& form, const Point& point);

/// Betti numbers beta_0..beta_m of the domain (beta_m = 0 for compact domains with boundary).
struct BettiNumbers {
    int dim = 2;
    std::array<Index, 4> values{0, 0, 0, 0};

    Index operator[](int k) const { return values[k]; }
    friend bool operator==(const BettiNumbers&, const BettiNumbers&) = default;
};

/// Connected components of the vertex graph spanned by the rows (edges) of a 0-differential.
struct Components {
    Index count = 0;
    std::vector<Index> label; // per column (vertex)
    std::vector<Index> lowest; // lowest vertex index per component
};

Components vertex_components(const SparseMatrix& d0);

inline constexpr std::array<const char*, 5> component_names{
    "normal_gradient", "tangential_curl", "normal_harmonic", "tangential_harmonic",
    "curly_gradient"};

enum Component { normal_gradient = 0, tangential_curl, normal_harmonic, tangential_harmonic, curly_gradient };

struct Decomposition {
    std::string mode;                 // "direct" or "orthogonal"
    std::array<Vector, 5> components; // tangential-support 1-forms
    Vector input;                     // W_t

    Vector potential_t;              // A_t (orthogonal) or A_n (direct, normal support)
    Vector potential_b;              // B_t
    Vector potential_extended;       // A on the extended support (orthogonal)
    Matrix normal_harmonic_basis;    // orthogonal: tilde H_{1,n}; direct: H_{1,n}
    Matrix tangential_harmonic_basis; // direct only: H_{1,t}
    std::vector<Index> pins;         // pinned tangential vertices (local ids)
    std::vector<Index> augmented;    // augmented tangential faces (local ids)

    Matrix gram;                     // 5 x 5 under S_t[1]
    double reconstruction_residual = 0.0; // ||W_t - sum|| / ||W_t||
    BettiNumbers betti;
    std::vector<SolveReport> reports;
    std::vector<std::pair<std::string, double>> timing;
};

/// 5 x 5 matrix of S_t[1] inner products.
Matrix gram_matrix(const std::array<Vector, 5>& components, const Vector& St1);

/// Decomposition by independent potential solves and kernel projections on either support.
Decomposition decompose_direct(const DiscreteForm& Wn, const DiscreteForm& Wt,
                               const OperatorSet& ops, const BettiNumbers& betti,
                               const SolverSettings& settings = {});

/// Discretely S_t[1]-orthogonal decomposition on the tangential support. Kernel dimensions
/// that disagree with `betti` raise TopologyError.
Decomposition decompose_orthogonal(const DiscreteForm& Wt, const OperatorSet& ops,
                                   const BettiNumbers& betti,
                                   const SolverSettings& settings = {});

} // namespace hodge
