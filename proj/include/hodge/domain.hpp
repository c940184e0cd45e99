#pragma once

#include "hodge/grid.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hodge {

/// Signed level-set function rho; the domain is {rho <= 0}.
using LevelSetFunction = std::function<double(const Point&)>;

///
/// Level-set samples at primal vertices and dual vertices (m-cell centers).
///
/// Every stored sample has magnitude at least `epsilon()`; smaller values are pushed to
/// +/-epsilon keeping their sign, exact zeros to +epsilon. With ties removed, "inside" is
/// the strict test rho < 0.
///
class LevelSetField {
public:
    LevelSetField(CartesianComplex complex, Vector primal, Vector dual, double epsilon);

    const CartesianComplex& complex() const { return complex_; }
    const Vector& primal() const { return primal_; }
    const Vector& dual() const { return dual_; }
    double epsilon() const { return epsilon_; }

    /// epsilon / spacing; fractions of support cells are floored at this ratio.
    double relative_floor() const { return epsilon_ / complex_.spacing(); }

    bool vertex_inside(Index vertex) const { return primal_[vertex] < 0.0; }
    bool center_inside(Index top_cell) const { return dual_[top_cell] < 0.0; }

private:
    CartesianComplex complex_;
    Vector primal_;
    Vector dual_;
    double epsilon_;
};

inline constexpr double default_relative_epsilon = 1e-5;

/// Samples an analytic level set exactly at primal and dual vertices.
LevelSetField sample_levelset(const CartesianComplex& complex, const LevelSetFunction& rho,
                              double relative_epsilon = default_relative_epsilon);

/// Builds a field from primal samples; dual samples are taken from `dual` when given and
/// otherwise interpolated multilinearly at the cell centers.
LevelSetField sample_levelset(const CartesianComplex& complex, const Vector& primal,
                              const std::optional<Vector>& dual = std::nullopt,
                              double relative_epsilon = default_relative_epsilon);

/// Perturbs a raw sample away from zero.
double perturb_sample(double value, double epsilon);

/// Cells of one degree retained for a boundary condition, with a dense local numbering.
struct SupportSet {
    SupportKind kind = SupportKind::normal;
    int degree = 0;
    std::vector<std::uint8_t> included; // per global cell
    std::vector<Index> cells;           // local index -> global cell id
    std::vector<Index> local;           // global cell id -> local index, or -1

    Index size() const { return static_cast<Index>(cells.size()); }
    bool contains(Index global) const { return included[global] != 0; }
};

/// normal: >= 1 primal vertex inside. tangential: >= 1 incident m-cell center inside.
/// extended0 (k = 0 only): vertices incident to a normal or tangential edge.
SupportSet build_support(const LevelSetField& field, SupportKind kind, int k);

enum class Side { primal, dual };

/// Per-cell measure of (cell intersect M). For Side::dual the measured cell is the dual
/// (m-k)-cell of each primal k-cell, with values in length^(m-k).
struct FractionalVolumes {
    int degree = 0;
    Side side = Side::primal;
    Vector values; // indexed by global primal k-cell id
};

FractionalVolumes fractional_volume(const LevelSetField& field, int k, Side side);

/// Analytic domain preset: level set plus the grid box it is sampled on.
struct Preset {
    std::string name;
    int dim = 2;
    LevelSetFunction rho;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
};

using PresetParams = std::map<std::string, double>;

/// Registered names: disk, annulus, rect_difference (alias arnold), figure8_2d, two_disks,
/// ball, shell, torus, figure8_3d. Parameters override the defaults (r_in, r_out, R, r).
Preset make_preset(const std::string& name, const PresetParams& params = {});

std::vector<std::string> preset_names();

/// Complex covering the preset box with `n` vertices along its longest axis.
CartesianComplex complex_for_box(const std::vector<double>& lo, const std::vector<double>& hi,
                                 Index n);

} // namespace hodge
