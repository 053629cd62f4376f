#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace isac {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using rvec = Eigen::VectorXd;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Uniform planar array on the xz-plane.
struct ArrayGeometry {
    int m_x = 8;
    int m_z = 8;
    double spacing_over_wavelength = 0.5;

    int elements() const { return m_x * m_z; }
    void validate() const;
};

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Position operator+(const Position& a, const Position& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Position operator-(const Position& a, const Position& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend bool operator==(const Position&, const Position&) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double distance(const Position& a, const Position& b) { return (a - b).norm(); }

/// theta from +z in [0, pi]; phi from +x, counterclockwise, in [0, 2pi).
struct DirectionAngles {
    double theta = 0.0;
    double phi = 0.0;
};

/// Direction from `source` to `target`. Throws DegenerateGeometryError when they coincide.
DirectionAngles angles_from_positions(const Position& source, const Position& target);

/// Point at `range` meters from `origin` along (theta, phi).
Position place(const Position& origin, const DirectionAngles& angles, double range);

/// Kronecker product of the x-axis ramp and the z-axis ramp; entry (m, n) sits at index m * m_z + n.
cvec upa_steering(const DirectionAngles& angles, const ArrayGeometry& geom);

/// Axis-aligned rectangle at constant height.
struct RegionSpec {
    double center_x = 0.0;
    double center_y = 50.0;
    double extent_x = 50.0;
    double extent_y = 50.0;
    double height = 10.0;
};

/// Discretized coverage region. Steering vectors are stored column-wise: column l belongs to point l.
struct CoverageGrid {
    std::vector<Position> points;
    cmat tx_steering;  // b(q_l), from BS-1
    cmat rx_steering;  // a(q_l), from BS-2
    rvec eta;          // filled by eta_weights
    int n_x = 0;
    int n_y = 0;
    double spacing_x = 0.0;
    double spacing_y = 0.0;

    int size() const { return static_cast<int>(points.size()); }
    Position centroid() const;
};

struct Scenario;

/// Closed lattice (endpoints included), point index l = iy * n_x + ix.
CoverageGrid build_coverage_grid(const RegionSpec& region, int n_x, int n_y, const Scenario& scenario);

/// Grid over an explicit point list (no lattice structure; spacings stay zero).
CoverageGrid grid_from_points(const std::vector<Position>& points, const Scenario& scenario);

}  // namespace isac
