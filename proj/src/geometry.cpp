#include "isac/geometry.hpp"

#include <algorithm>
#include <string>

#include "isac/error.hpp"
#include "isac/scenario.hpp"

namespace isac {

void ArrayGeometry::validate() const {
    if (m_x < 1 || m_z < 1)
        throw ValidationError("array must have at least one element per axis, got " + std::to_string(m_x) + "x" +
                              std::to_string(m_z));
    if (!(spacing_over_wavelength > 0.0) || !std::isfinite(spacing_over_wavelength))
        throw ValidationError("array spacing over wavelength must be positive");
}

DirectionAngles angles_from_positions(const Position& source, const Position& target) {
    const Position d = target - source;
    const double r = d.norm();
    if (!(r > 0.0))
        throw DegenerateGeometryError("cannot take a direction between coincident positions");

    const double cos_theta = std::clamp(d.z / r, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    double phi = 0.0;
    // Straight up or down: phi has no meaning, fixed to 0.
    if (std::hypot(d.x, d.y) > 1e-15 * r) {
        phi = std::atan2(d.y, d.x);
        if (phi < 0.0)
            phi += 2.0 * std::numbers::pi;
        if (phi >= 2.0 * std::numbers::pi)
            phi = 0.0;
    }
    return {theta, phi};
}

Position place(const Position& origin, const DirectionAngles& a, double range) {
    const double st = std::sin(a.theta);
    return {origin.x + range * st * std::cos(a.phi), origin.y + range * st * std::sin(a.phi),
            origin.z + range * std::cos(a.theta)};
}

cvec upa_steering(const DirectionAngles& angles, const ArrayGeometry& geom) {
    geom.validate();
    const double k = 2.0 * std::numbers::pi * geom.spacing_over_wavelength;
    const double ux = k * std::sin(angles.theta) * std::cos(angles.phi);
    const double uz = k * std::cos(angles.theta);

    cvec b(geom.elements());
    for (int m = 0; m < geom.m_x; ++m) {
        for (int n = 0; n < geom.m_z; ++n) {
            b(m * geom.m_z + n) = std::polar(1.0, ux * m + uz * n);
        }
    }
    return b;
}

Position CoverageGrid::centroid() const {
    Position c;
    if (points.empty())
        return c;
    for (const auto& p : points) {
        c.x += p.x;
        c.y += p.y;
        c.z += p.z;
    }
    const double n = static_cast<double>(points.size());
    return {c.x / n, c.y / n, c.z / n};
}

namespace {

void fill_steering(CoverageGrid& grid, const Scenario& scenario) {
    const int L = grid.size();
    grid.tx_steering.resize(scenario.tx_antennas(), L);
    grid.rx_steering.resize(scenario.rx_antennas(), L);
    grid.eta = rvec::Zero(L);
    for (int l = 0; l < L; ++l) {
        grid.tx_steering.col(l) = upa_steering(angles_from_positions(scenario.bs1(), grid.points[l]), scenario.tx_array);
        grid.rx_steering.col(l) = upa_steering(angles_from_positions(scenario.bs2(), grid.points[l]), scenario.rx_array);
    }
}

}  // namespace

CoverageGrid build_coverage_grid(const RegionSpec& region, int n_x, int n_y, const Scenario& scenario) {
    if (n_x < 1 || n_y < 1)
        throw ValidationError("grid counts must be at least 1");
    if (region.extent_x < 0.0 || region.extent_y < 0.0)
        throw ValidationError("region extents must be non-negative");
    if ((region.extent_x == 0.0 && n_x > 1) || (region.extent_y == 0.0 && n_y > 1))
        throw ValidationError("zero-extent region axis cannot hold more than one grid point");

    CoverageGrid grid;
    grid.n_x = n_x;
    grid.n_y = n_y;
    grid.spacing_x = n_x > 1 ? region.extent_x / (n_x - 1) : 0.0;
    grid.spacing_y = n_y > 1 ? region.extent_y / (n_y - 1) : 0.0;
    const double x0 = n_x > 1 ? region.center_x - 0.5 * region.extent_x : region.center_x;
    const double y0 = n_y > 1 ? region.center_y - 0.5 * region.extent_y : region.center_y;

    grid.points.reserve(static_cast<std::size_t>(n_x) * n_y);
    for (int iy = 0; iy < n_y; ++iy) {
        for (int ix = 0; ix < n_x; ++ix) {
            // Last index lands exactly on the far edge.
            const double x = (n_x > 1 && ix == n_x - 1) ? region.center_x + 0.5 * region.extent_x : x0 + ix * grid.spacing_x;
            const double y = (n_y > 1 && iy == n_y - 1) ? region.center_y + 0.5 * region.extent_y : y0 + iy * grid.spacing_y;
            grid.points.push_back({x, y, region.height});
        }
    }
    fill_steering(grid, scenario);
    return grid;
}

CoverageGrid grid_from_points(const std::vector<Position>& points, const Scenario& scenario) {
    CoverageGrid grid;
    grid.points = points;
    grid.n_x = static_cast<int>(points.size());
    grid.n_y = points.empty() ? 0 : 1;
    fill_steering(grid, scenario);
    return grid;
}

}  // namespace isac
