#include "hodge/grid.hpp"

#include <algorithm>
#include <cmath>

namespace hodge {

namespace {

// Masks of all k-subsets of {0..m-1}, lexicographic in their sorted axis lists.
std::vector<unsigned> lexicographic_subsets(int m, int k)
{
    std::vector<std::vector<int>> lists;
    std::vector<int> current;
    auto recurse = [&](auto&& self, int start) -> void {
        if (static_cast<int>(current.size()) == k) {
            lists.push_back(current);
            return;
        }
        for (int a = start; a < m; ++a) {
            current.push_back(a);
            self(self, a + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);
    std::vector<unsigned> masks;
    for (const auto& list : lists) {
        unsigned mask = 0;
        for (int a : list) mask |= 1u << a;
        masks.push_back(mask);
    }
    return masks;
}

} // namespace

CartesianComplex::CartesianComplex(int dimension, std::vector<Index> vertex_counts,
                                   double spacing, std::vector<double> origin)
    : dim_(dimension), spacing_(spacing)
{
    if (dimension != 2 && dimension != 3) {
        throw std::invalid_argument("grid dimension must be 2 or 3, got " +
                                    std::to_string(dimension));
    }
    if (static_cast<int>(vertex_counts.size()) != dimension ||
        static_cast<int>(origin.size()) != dimension) {
        throw std::invalid_argument("vertex_counts and origin must have one entry per axis");
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw std::invalid_argument("grid spacing must be positive");
    }
    for (int a = 0; a < dimension; ++a) {
        if (vertex_counts[a] < 2) {
            throw std::invalid_argument("vertex count below minimum of 2 on axis " +
                                        std::to_string(a));
        }
        if (!std::isfinite(origin[a])) throw std::invalid_argument("origin must be finite");
        counts_[a] = vertex_counts[a];
        origin_[a] = origin[a];
    }
    for (int k = 0; k <= dim_; ++k) {
        subsets_[k] = lexicographic_subsets(dim_, k);
        Index offset = 0;
        for (unsigned mask : subsets_[k]) {
            offsets_[k].push_back(offset);
            const MultiIndex e = extents(mask);
            offset += e[0] * e[1] * e[2];
        }
        total_[k] = offset;
    }
}

MultiIndex CartesianComplex::extents(unsigned axes) const
{
    MultiIndex e{1, 1, 1};
    for (int a = 0; a < dim_; ++a) e[a] = counts_[a] - (((axes >> a) & 1u) ? 1 : 0);
    return e;
}

Cell CartesianComplex::cell(int k, Index id) const
{
    if (k < 0 || k > dim_ || id < 0 || id >= total_[k]) {
        throw std::out_of_range("cell id out of range");
    }
    const auto& offs = offsets_[k];
    const auto it = std::upper_bound(offs.begin(), offs.end(), id);
    const auto s = static_cast<std::size_t>(std::distance(offs.begin(), it) - 1);
    Cell c;
    c.axes = subsets_[k][s];
    Index rest = id - offs[s];
    const MultiIndex e = extents(c.axes);
    for (int a = dim_ - 1; a >= 0; --a) {
        c.index[a] = rest % e[a];
        rest /= e[a];
    }
    return c;
}

Index CartesianComplex::cell_id(const Cell& c) const
{
    const int k = popcount(c.axes);
    const auto& subs = subsets_[k];
    const auto s = static_cast<std::size_t>(
        std::distance(subs.begin(), std::find(subs.begin(), subs.end(), c.axes)));
    const MultiIndex e = extents(c.axes);
    Index lin = 0;
    for (int a = 0; a < dim_; ++a) lin = lin * e[a] + c.index[a];
    return offsets_[k][s] + lin;
}

std::optional<Index> CartesianComplex::find(const Cell& c) const
{
    const MultiIndex e = extents(c.axes);
    for (int a = 0; a < dim_; ++a) {
        if (c.index[a] < 0 || c.index[a] >= e[a]) return std::nullopt;
    }
    return cell_id(c);
}

Point CartesianComplex::vertex_position(const MultiIndex& v) const
{
    Point p = Point::Zero();
    for (int a = 0; a < dim_; ++a) p[a] = origin_[a] + spacing_ * static_cast<double>(v[a]);
    return p;
}

Point CartesianComplex::center(const Cell& c) const
{
    Point p = vertex_position(c.index);
    for (int a = 0; a < dim_; ++a) {
        if (c.spans(a)) p[a] += 0.5 * spacing_;
    }
    return p;
}

std::vector<MultiIndex> CartesianComplex::cell_vertices(const Cell& c) const
{
    std::vector<int> axes;
    for (int a = 0; a < dim_; ++a) {
        if (c.spans(a)) axes.push_back(a);
    }
    std::vector<MultiIndex> out;
    out.reserve(std::size_t{1} << axes.size());
    for (unsigned pattern = 0; pattern < (1u << axes.size()); ++pattern) {
        MultiIndex v = c.index;
        for (std::size_t j = 0; j < axes.size(); ++j) {
            if ((pattern >> j) & 1u) v[axes[j]] += 1;
        }
        out.push_back(v);
    }
    return out;
}

std::vector<MultiIndex> CartesianComplex::incident_top_cells(const Cell& c) const
{
    std::vector<int> free_axes;
    for (int a = 0; a < dim_; ++a) {
        if (!c.spans(a)) free_axes.push_back(a);
    }
    std::vector<MultiIndex> out;
    for (unsigned pattern = 0; pattern < (1u << free_axes.size()); ++pattern) {
        MultiIndex t = c.index;
        bool valid = true;
        for (std::size_t j = 0; j < free_axes.size(); ++j) {
            const int a = free_axes[j];
            // bit set: the m-cell on the upper side of the cell along axis a
            if (!((pattern >> j) & 1u)) t[a] -= 1;
            if (t[a] < 0 || t[a] > counts_[a] - 2) valid = false;
        }
        if (valid) out.push_back(t);
    }
    return out;
}

SparseIncidence CartesianComplex::incidence(int k) const
{
    if (k < 0 || k > dim_ - 1) {
        throw std::invalid_argument("incidence degree must lie in [0, m-1], got " +
                                    std::to_string(k));
    }
    std::vector<Eigen::Triplet<int>> entries;
    entries.reserve(static_cast<std::size_t>(total_[k + 1]) * 2 * (k + 1));
    for (Index row = 0; row < total_[k + 1]; ++row) {
        const Cell tau = cell(k + 1, row);
        int position = 0;
        for (int a = 0; a < dim_; ++a) {
            if (!tau.spans(a)) continue;
            const int parity = (position % 2 == 0) ? 1 : -1;
            Cell lower{tau.axes & ~(1u << a), tau.index};
            Cell upper = lower;
            upper.index[a] += 1;
            entries.emplace_back(static_cast<int>(row), static_cast<int>(cell_id(lower)),
                                 -parity);
            entries.emplace_back(static_cast<int>(row), static_cast<int>(cell_id(upper)),
                                 parity);
            ++position;
        }
    }
    SparseIncidence d(total_[k + 1], total_[k]);
    d.setFromTriplets(entries.begin(), entries.end());
    return d;
}

CartesianComplex build_complex(int dimension, const std::vector<Index>& vertex_counts,
                               double spacing, const std::vector<double>& origin)
{
    return CartesianComplex(dimension, vertex_counts, spacing, origin);
}

} // namespace hodge
