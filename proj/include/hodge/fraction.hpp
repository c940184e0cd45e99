#pragma once

#include <array>
#include <cmath>

namespace hodge::fraction {

/// Inside length fraction of a unit segment with linear samples at its ends.
template <typename Scalar>
Scalar segment(Scalar a, Scalar b)
{
    const bool ia = a < Scalar(0);
    const bool ib = b < Scalar(0);
    if (ia && ib) return Scalar(1);
    if (!ia && !ib) return Scalar(0);
    const Scalar t = a / (a - b); // root position measured from a
    return ia ? t : Scalar(1) - t;
}

///
/// Inside area fraction of the unit square with corner samples in counterclockwise order
/// (0,0), (1,0), (1,1), (0,1), using linear roots along the edges.
///
/// Saddle configurations are split by the sign of `center`.
///
template <typename Scalar>
Scalar square(const std::array<Scalar, 4>& v, Scalar center)
{
    static constexpr std::array<std::array<double, 2>, 4> corner{
        {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}};
    int inside = 0;
    for (Scalar s : v) inside += (s < Scalar(0)) ? 1 : 0;
    if (inside == 4) return Scalar(1);
    if (inside == 0) return Scalar(0);

    auto crossing = [&](int i) {
        const int j = (i + 1) % 4;
        const Scalar t = v[i] / (v[i] - v[j]);
        return std::array<Scalar, 2>{corner[i][0] + t * (corner[j][0] - corner[i][0]),
                                     corner[i][1] + t * (corner[j][1] - corner[i][1])};
    };
    auto shoelace = [](const auto& poly, int count) {
        Scalar twice = 0;
        for (int i = 0; i < count; ++i) {
            const int j = (i + 1) % count;
            twice += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
        }
        return std::abs(twice) / Scalar(2);
    };

    const bool saddle = inside == 2 && ((v[0] < 0) == (v[2] < 0));
    if (saddle && !(center < Scalar(0))) {
        // two separate corner triangles
        Scalar area = 0;
        for (int i = 0; i < 4; ++i) {
            if (!(v[i] < Scalar(0))) continue;
            const int prev = (i + 3) % 4;
            const auto p = crossing(i);
            const auto q = crossing(prev);
            std::array<std::array<Scalar, 2>, 3> tri{
                {{Scalar(corner[i][0]), Scalar(corner[i][1])}, p, q}};
            area += shoelace(tri, 3);
        }
        return area;
    }

    std::array<std::array<Scalar, 2>, 8> poly{};
    int count = 0;
    for (int i = 0; i < 4; ++i) {
        const int j = (i + 1) % 4;
        if (v[i] < Scalar(0)) poly[count++] = {Scalar(corner[i][0]), Scalar(corner[i][1])};
        if ((v[i] < Scalar(0)) != (v[j] < Scalar(0))) poly[count++] = crossing(i);
    }
    return shoelace(poly, count);
}

///
/// Inside volume fraction of the unit cube by midpoint subsampling of the trilinear
/// interpolant: `subdivisions`^3 subcells, each counted by the sign at its center.
///
/// Corner order: bit 0 -> x, bit 1 -> y, bit 2 -> z.
///
template <typename Scalar>
Scalar cube(const std::array<Scalar, 8>& v, int subdivisions = 8)
{
    int inside = 0;
    for (Scalar s : v) inside += (s < Scalar(0)) ? 1 : 0;
    if (inside == 8) return Scalar(1);
    if (inside == 0) return Scalar(0);
    const int n = subdivisions;
    long count = 0;
    for (int i = 0; i < n; ++i) {
        const Scalar x = (Scalar(i) + Scalar(0.5)) / Scalar(n);
        for (int j = 0; j < n; ++j) {
            const Scalar y = (Scalar(j) + Scalar(0.5)) / Scalar(n);
            // bilinear in (x, y) on the two z-faces
            const Scalar f0 = (1 - x) * (1 - y) * v[0] + x * (1 - y) * v[1] +
                              (1 - x) * y * v[2] + x * y * v[3];
            const Scalar f1 = (1 - x) * (1 - y) * v[4] + x * (1 - y) * v[5] +
                              (1 - x) * y * v[6] + x * y * v[7];
            for (int k = 0; k < n; ++k) {
                const Scalar z = (Scalar(k) + Scalar(0.5)) / Scalar(n);
                if ((1 - z) * f0 + z * f1 < Scalar(0)) ++count;
            }
        }
    }
    return Scalar(count) / Scalar(n * n * n);
}

} // namespace hodge::fraction
