#pragma once

#include "hodge/decompose.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hodge {

/// Analytic vector field with its five known components (empty function = zero component).
struct AnalyticField {
    std::string id;
    int dim = 2;
    VectorFunction total;
    std::array<VectorFunction, 5> components;
};

/// Registered ids: paper2d (annulus, r_in 1, r_out 4), ball3d (gradient + curl + curly
/// gradient), shell_hn (radial harmonic), torus_ht (swirl harmonic), zero2d, zero3d.
AnalyticField analytic_field(const std::string& id);
std::vector<std::string> analytic_field_ids();

///
/// Betti numbers of the voxelized domain (union of closed m-cells with inside centers),
/// from cell combinatorics only: beta_0 by union-find over its vertices and edges,
/// beta_{m-1} from the components of the complement (face-adjacent outside cells plus the
/// region beyond the grid box), beta_1 from the Euler characteristic.
///
BettiNumbers betti_oracle(const LevelSetField& field);

/// Betti numbers by exact ranks of the tangential incidence matrices (dense, small grids).
BettiNumbers betti_by_rank(const OperatorSet& ops);

/// dim ker of L_t[k] and L_n[k] for every k, keyed "L0t", "L1n", ...
std::map<std::string, Index> laplacian_kernel_dimensions(const OperatorSet& ops,
                                                          const SolverSettings& settings = {});

/// Ascending eigenvalues (with multiplicity) of the continuous 1-form Laplacian under the
/// normal condition on the shell r_in < |x| < r_out, including the single zero.
std::vector<double> shell_reference_spectrum(double r_out, double r_in, std::size_t count,
                                             double bisection_tol = 1e-10);

/// One row of a published comparison table.
struct ComponentRow {
    double exact_norm = 0.0;
    double computed_norm = 0.0;
    std::optional<double> relative_error; // absent when the analytic component is 0
};

struct AnalyticCase {
    std::string id;
    std::string preset;
    PresetParams params;
    std::string field;
    std::map<Index, std::array<ComponentRow, 5>> reference; // by grid size
};

/// annulus, ball, shell, torus cases with their reference rows.
const std::vector<AnalyticCase>& analytic_cases();
const AnalyticCase& analytic_case(const std::string& id);

struct CaseReport {
    std::string id;
    Index grid = 0;
    BettiNumbers betti;
    std::array<double, 5> analytic_norm{};
    std::array<double, 5> computed_norm{};
    std::array<double, 5> relative_error{}; // NaN where the analytic component is 0
    Matrix gram;
    double max_gram_ratio = 0.0; // max |g_ij| / sqrt(g_ii g_jj) over i != j
    double reconstruction_residual = 0.0;
    Decomposition decomposition;
};

/// Off-diagonal Gram entries relative to the geometric mean of their diagonals (pairs with a
/// zero diagonal count as 0 when the entry is exactly 0, else infinity).
double max_gram_ratio(const Matrix& gram);

/// Discretizes the case's total field and components on the tangential support of the grid
/// and runs the orthogonal decomposition.
CaseReport run_case(const AnalyticCase& c, Index grid, const SolverSettings& settings = {});

struct ArnoldRow {
    Index grid = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Index kernel_dimension = 0;
    double seconds = 0.0;
};

/// First two eigenvalues of L_t[1] on the rectangle-difference domain.
std::vector<ArnoldRow> run_arnold(const std::vector<Index>& grid_sizes,
                                  const SolverSettings& settings = {});

/// Field of a preset sampled on a grid of n vertices along the longest box axis.
LevelSetField preset_field(const std::string& preset, Index n, const PresetParams& params = {});

} // namespace hodge
