#include "hodge/domain.hpp"
#include "hodge/fraction.hpp"

#include <algorithm>
#include <cmath>

namespace hodge {

double perturb_sample(double value, double epsilon)
{
    if (std::abs(value) >= epsilon) return value;
    return value < 0.0 ? -epsilon : epsilon;
}

LevelSetField::LevelSetField(CartesianComplex complex, Vector primal, Vector dual,
                             double epsilon)
    : complex_(std::move(complex)), primal_(std::move(primal)), dual_(std::move(dual)),
      epsilon_(epsilon)
{
    const int m = complex_.dim();
    if (primal_.size() != complex_.cell_count(0)) {
        throw std::invalid_argument("primal level-set sample count " +
                                    std::to_string(primal_.size()) + " does not match " +
                                    std::to_string(complex_.cell_count(0)) + " vertices");
    }
    if (dual_.size() != complex_.cell_count(m)) {
        throw std::invalid_argument("dual level-set sample count does not match m-cell count");
    }
    if (!primal_.allFinite() || !dual_.allFinite()) {
        throw std::invalid_argument("level-set samples must be finite");
    }
    for (Index i = 0; i < primal_.size(); ++i) primal_[i] = perturb_sample(primal_[i], epsilon_);
    for (Index i = 0; i < dual_.size(); ++i) dual_[i] = perturb_sample(dual_[i], epsilon_);
}

LevelSetField sample_levelset(const CartesianComplex& complex, const LevelSetFunction& rho,
                              double relative_epsilon)
{
    const int m = complex.dim();
    Vector primal(complex.cell_count(0));
    for (Index v = 0; v < primal.size(); ++v) {
        primal[v] = rho(complex.vertex_position(complex.cell(0, v).index));
    }
    Vector dual(complex.cell_count(m));
    for (Index c = 0; c < dual.size(); ++c) dual[c] = rho(complex.center(complex.cell(m, c)));
    return LevelSetField(complex, std::move(primal), std::move(dual),
                         relative_epsilon * complex.spacing());
}

LevelSetField sample_levelset(const CartesianComplex& complex, const Vector& primal,
                              const std::optional<Vector>& dual, double relative_epsilon)
{
    const int m = complex.dim();
    if (primal.size() != complex.cell_count(0)) {
        throw std::invalid_argument("primal level-set array has " +
                                    std::to_string(primal.size()) + " samples, expected " +
                                    std::to_string(complex.cell_count(0)));
    }
    if (!primal.allFinite()) throw std::invalid_argument("level-set samples must be finite");
    Vector centers;
    if (dual) {
        centers = *dual;
    } else {
        centers.resize(complex.cell_count(m));
        for (Index c = 0; c < centers.size(); ++c) {
            const auto corners = complex.cell_vertices(complex.cell(m, c));
            double sum = 0.0;
            for (const auto& v : corners) sum += primal[complex.vertex_id(v)];
            centers[c] = sum / static_cast<double>(corners.size());
        }
    }
    return LevelSetField(complex, primal, std::move(centers),
                         relative_epsilon * complex.spacing());
}

namespace {

void finalize(SupportSet& s)
{
    s.local.assign(s.included.size(), -1);
    s.cells.clear();
    for (std::size_t i = 0; i < s.included.size(); ++i) {
        if (s.included[i]) {
            s.local[i] = static_cast<Index>(s.cells.size());
            s.cells.push_back(static_cast<Index>(i));
        }
    }
}

} // namespace

SupportSet build_support(const LevelSetField& field, SupportKind kind, int k)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    if (k < 0 || k > m) throw std::invalid_argument("support degree out of range");
    if (kind == SupportKind::extended0 && k != 0) {
        throw std::invalid_argument("extended support is defined for 0-forms only");
    }
    SupportSet s;
    s.kind = kind;
    s.degree = k;
    s.included.assign(static_cast<std::size_t>(cx.cell_count(k)), 0);

    switch (kind) {
    case SupportKind::normal:
        for (Index id = 0; id < cx.cell_count(k); ++id) {
            for (const auto& v : cx.cell_vertices(cx.cell(k, id))) {
                if (field.vertex_inside(cx.vertex_id(v))) {
                    s.included[id] = 1;
                    break;
                }
            }
        }
        break;
    case SupportKind::tangential:
        for (Index id = 0; id < cx.cell_count(k); ++id) {
            for (const auto& t : cx.incident_top_cells(cx.cell(k, id))) {
                if (field.center_inside(cx.top_cell_id(t))) {
                    s.included[id] = 1;
                    break;
                }
            }
        }
        break;
    case SupportKind::extended0: {
        const SupportSet ne = build_support(field, SupportKind::normal, 1);
        const SupportSet te = build_support(field, SupportKind::tangential, 1);
        for (Index e = 0; e < cx.cell_count(1); ++e) {
            if (!ne.contains(e) && !te.contains(e)) continue;
            for (const auto& v : cx.cell_vertices(cx.cell(1, e))) s.included[cx.vertex_id(v)] = 1;
        }
        break;
    }
    }
    finalize(s);
    return s;
}

namespace {

// Dual samples at the 2^(m-k) dual vertices of the dual cell of `c`, in binary offset order
// over the axes `c` does not span. Dual vertices beyond the grid count as outside.
template <std::size_t N>
std::array<double, N> dual_corners(const LevelSetField& field, const Cell& c)
{
    const auto& cx = field.complex();
    std::array<int, 3> free_axes{};
    int nfree = 0;
    for (int a = 0; a < cx.dim(); ++a) {
        if (!c.spans(a)) free_axes[nfree++] = a;
    }
    std::array<double, N> out{};
    for (unsigned pattern = 0; pattern < N; ++pattern) {
        MultiIndex t = c.index;
        bool valid = true;
        for (int j = 0; j < nfree; ++j) {
            const int a = free_axes[j];
            if (!((pattern >> j) & 1u)) t[a] -= 1;
            if (t[a] < 0 || t[a] > cx.vertex_count(a) - 2) valid = false;
        }
        out[pattern] = valid ? field.dual()[cx.top_cell_id(t)] : cx.spacing();
    }
    return out;
}

template <std::size_t N>
std::array<double, N> primal_corners(const LevelSetField& field, const Cell& c)
{
    const auto& cx = field.complex();
    const auto verts = cx.cell_vertices(c);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = field.primal()[cx.vertex_id(verts[i])];
    return out;
}

// binary offset order (00, 10, 01, 11) -> counterclockwise (00, 10, 11, 01)
std::array<double, 4> counterclockwise(const std::array<double, 4>& b)
{
    return {b[0], b[1], b[3], b[2]};
}

double mean_primal(const LevelSetField& field, const Cell& c)
{
    const auto& cx = field.complex();
    double sum = 0.0;
    const auto verts = cx.cell_vertices(c);
    for (const auto& v : verts) sum += field.primal()[cx.vertex_id(v)];
    return sum / static_cast<double>(verts.size());
}

double primal_fraction(const LevelSetField& field, const Cell& c, int k)
{
    const auto& cx = field.complex();
    switch (k) {
    case 0: return field.primal()[cx.vertex_id(c.index)] < 0.0 ? 1.0 : 0.0;
    case 1: {
        const auto v = primal_corners<2>(field, c);
        return fraction::segment(v[0], v[1]);
    }
    case 2: {
        const auto v = primal_corners<4>(field, c);
        // a 2D face center is a dual vertex with its own sample
        const double center = cx.dim() == 2 ? field.dual()[cx.top_cell_id(c.index)]
                                            : 0.25 * (v[0] + v[1] + v[2] + v[3]);
        return fraction::square(counterclockwise(v), center);
    }
    default: return fraction::cube(primal_corners<8>(field, c));
    }
}

double dual_fraction(const LevelSetField& field, const Cell& c, int k)
{
    const auto& cx = field.complex();
    switch (cx.dim() - k) {
    case 0: return field.dual()[cx.top_cell_id(c.index)] < 0.0 ? 1.0 : 0.0;
    case 1: {
        const auto v = dual_corners<2>(field, c);
        return fraction::segment(v[0], v[1]);
    }
    case 2: {
        const auto v = dual_corners<4>(field, c);
        // the dual face is centered on the primal cell
        return fraction::square(counterclockwise(v), mean_primal(field, c));
    }
    default: return fraction::cube(dual_corners<8>(field, c));
    }
}

} // namespace

FractionalVolumes fractional_volume(const LevelSetField& field, int k, Side side)
{
    const auto& cx = field.complex();
    const int m = cx.dim();
    if (k < 0 || k > m) {
        throw std::invalid_argument("fractional volume requested for degree " +
                                    std::to_string(k) + " above dimension " + std::to_string(m));
    }
    FractionalVolumes out;
    out.degree = k;
    out.side = side;
    out.values.resize(cx.cell_count(k));
    const int measured = side == Side::primal ? k : m - k;
    const double scale = std::pow(cx.spacing(), measured);
    for (Index id = 0; id < cx.cell_count(k); ++id) {
        const Cell c = cx.cell(k, id);
        const double f = side == Side::primal ? primal_fraction(field, c, k)
                                              : dual_fraction(field, c, k);
        out.values[id] = f * scale;
    }
    return out;
}

// ---------------------------------------------------------------------------------------
// presets

namespace {

double param(const PresetParams& p, const std::string& key, double fallback)
{
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

// Signed distance to an axis-aligned box given by its lower and upper corners (2D).
double box_sdf(double x, double y, double x0, double y0, double x1, double y1)
{
    const double cx = 0.5 * (x0 + x1);
    const double cy = 0.5 * (y0 + y1);
    const double qx = std::abs(x - cx) - 0.5 * (x1 - x0);
    const double qy = std::abs(y - cy) - 0.5 * (y1 - y0);
    const double ox = std::max(qx, 0.0);
    const double oy = std::max(qy, 0.0);
    return std::sqrt(ox * ox + oy * oy) + std::min(std::max(qx, qy), 0.0);
}

double torus_sdf(const Point& p, const Point& center, double major, double minor)
{
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    const double dz = p[2] - center[2];
    const double q = std::sqrt(dx * dx + dy * dy) - major;
    return std::sqrt(q * q + dz * dz) - minor;
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"disk",  "annulus", "rect_difference", "figure8_2d", "two_disks",
            "ball",  "shell",   "torus",           "figure8_3d"};
}

Preset make_preset(const std::string& name, const PresetParams& prm)
{
    Preset p;
    p.name = name;
    if (name == "disk") {
        const double r = param(prm, "r", 1.0);
        p.dim = 2;
        p.rho = [r](const Point& x) { return x.head<2>().norm() - r; };
        p.box_lo = {-1.1 * r, -1.1 * r};
        p.box_hi = {1.1 * r, 1.1 * r};
    } else if (name == "annulus") {
        const double a = param(prm, "r_in", 1.0);
        const double b = param(prm, "r_out", 4.0);
        if (!(0.0 < a && a < b)) throw std::invalid_argument("annulus needs 0 < r_in < r_out");
        p.dim = 2;
        p.rho = [a, b](const Point& x) {
            return std::abs(x.head<2>().norm() - 0.5 * (a + b)) - 0.5 * (b - a);
        };
        p.box_lo = {-(b + 0.1), -(b + 0.1)};
        p.box_hi = {b + 0.1, b + 0.1};
    } else if (name == "rect_difference" || name == "arnold") {
        // (0,3)^2 minus [2/3,2] x [3/4,2]; exact distance to the union of both boundaries
        p.name = "rect_difference";
        p.dim = 2;
        p.rho = [](const Point& x) {
            const double outer = box_sdf(x[0], x[1], 0.0, 0.0, 3.0, 3.0);
            const double inner = box_sdf(x[0], x[1], 2.0 / 3.0, 0.75, 2.0, 2.0);
            const bool in_m = outer < 0.0 && inner > 0.0;
            const double dist = std::min(std::abs(outer), std::abs(inner));
            return in_m ? -dist : dist;
        };
        p.box_lo = {-0.1, -0.1};
        p.box_hi = {3.1, 3.1};
    } else if (name == "figure8_2d") {
        const double c = param(prm, "offset", 0.8);
        const double r = param(prm, "r", 1.0);
        const double h = param(prm, "hole", 0.35);
        p.dim = 2;
        p.rho = [c, r, h](const Point& x) {
            const double d1 = std::hypot(x[0] + c, x[1]);
            const double d2 = std::hypot(x[0] - c, x[1]);
            const double outer = std::min(d1, d2) - r;
            return std::max({outer, h - d1, h - d2});
        };
        p.box_lo = {-(c + r + 0.1), -(r + 0.1)};
        p.box_hi = {c + r + 0.1, r + 0.1};
    } else if (name == "two_disks") {
        const double c = param(prm, "offset", 0.8);
        const double r = param(prm, "r", 0.5);
        p.dim = 2;
        p.rho = [c, r](const Point& x) {
            return std::min(std::hypot(x[0] + c, x[1]), std::hypot(x[0] - c, x[1])) - r;
        };
        p.box_lo = {-(c + r + 0.1), -(r + 0.1)};
        p.box_hi = {c + r + 0.1, r + 0.1};
    } else if (name == "ball") {
        const double r = param(prm, "r", 1.0);
        p.dim = 3;
        p.rho = [r](const Point& x) { return x.norm() - r; };
        p.box_lo = {-1.1 * r, -1.1 * r, -1.1 * r};
        p.box_hi = {1.1 * r, 1.1 * r, 1.1 * r};
    } else if (name == "shell") {
        const double a = param(prm, "r_in", 0.5);
        const double b = param(prm, "r_out", 1.0);
        if (!(0.0 < a && a < b)) throw std::invalid_argument("shell needs 0 < r_in < r_out");
        p.dim = 3;
        p.rho = [a, b](const Point& x) { return std::abs(x.norm() - 0.5 * (a + b)) - 0.5 * (b - a); };
        p.box_lo = {-(b + 0.1), -(b + 0.1), -(b + 0.1)};
        p.box_hi = {b + 0.1, b + 0.1, b + 0.1};
    } else if (name == "torus") {
        const double big = param(prm, "R", 1.0);
        const double small = param(prm, "r", 0.5);
        if (!(0.0 < small && small < big)) throw std::invalid_argument("torus needs 0 < r < R");
        p.dim = 3;
        p.rho = [big, small](const Point& x) {
            return torus_sdf(x, Point::Zero(), big, small);
        };
        const double h = 1.1 * (big + small);
        p.box_lo = {-h, -h, -h};
        p.box_hi = {h, h, h};
    } else if (name == "figure8_3d") {
        const double big = param(prm, "R", 0.6);
        const double small = param(prm, "r", 0.25);
        p.dim = 3;
        p.rho = [big, small](const Point& x) {
            return std::min(torus_sdf(x, Point(-big, 0.0, 0.0), big, small),
                            torus_sdf(x, Point(big, 0.0, 0.0), big, small));
        };
        p.box_lo = {-(2 * big + small + 0.1), -(big + small + 0.1), -(small + 0.1)};
        p.box_hi = {2 * big + small + 0.1, big + small + 0.1, small + 0.1};
    } else {
        throw std::invalid_argument("unknown shape preset '" + name + "'");
    }
    return p;
}

CartesianComplex complex_for_box(const std::vector<double>& lo, const std::vector<double>& hi,
                                 Index n)
{
    if (lo.size() != hi.size()) throw std::invalid_argument("box corners differ in dimension");
    if (n < 2) throw std::invalid_argument("grid size must be at least 2");
    const int m = static_cast<int>(lo.size());
    double longest = 0.0;
    for (int a = 0; a < m; ++a) longest = std::max(longest, hi[a] - lo[a]);
    const double l = longest / static_cast<double>(n - 1);
    std::vector<Index> counts(m);
    std::vector<double> origin(m);
    for (int a = 0; a < m; ++a) {
        const double extent = hi[a] - lo[a];
        counts[a] = std::max<Index>(2, static_cast<Index>(std::llround(extent / l)) + 1);
        origin[a] = lo[a] + 0.5 * (extent - l * static_cast<double>(counts[a] - 1));
    }
    return CartesianComplex(m, counts, l, origin);
}

} // namespace hodge
