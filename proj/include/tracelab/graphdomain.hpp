#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tracelab/common.hpp"

namespace tracelab {

enum class Family {
    half_plane,
    quadrant,
    parabola_exterior,
    slit_plane,
    disk_exterior,
    rectangle,
    custom,
};

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

// Unbounded families are truncated and carry an absorbing layer.
bool is_unbounded(Family family);

enum class VertexKind : std::uint8_t { interior, boundary, absorbing };

/// Geometry request for a lattice discretization. All coordinates are in
/// lattice units (mesh 1); the lattice is {0,...,side}^2.
///
/// Family notes:
///  - half_plane: boundary row y = 0, edge weight max(y, 1/2)^(1-alpha);
///    truncation is the horizontal row y = truncation_radius (absorbing),
///    the side columns are reflecting.
///  - quadrant: boundary on both axes, corner vertex removed; absorbing
///    quarter circle of radius truncation_radius around the origin.
///  - parabola_exterior: {y - c_y <= (x - c_x)^2 / scale} with vertex c at
///    the lattice centre; `scale` is lattice units per unit length
///    (default side / 16).
///  - slit_plane: slit {y = c_y, x <= c_x}; slit vertices are duplicated
///    into an upper and a lower copy, the tip stays single.
///  - disk_exterior: {|v - c| >= scale} (default scale = truncation / 16).
///  - rectangle: the whole square, frame minus its four corners is the
///    boundary; no absorbing vertices.
/// Circle-truncated families also absorb on the outer lattice frame.
///
/// Empirical uniformity constants c_U (depth of corkscrew points relative
/// to r, observed at side <= 128): half_plane 2, quadrant 1.4,
/// parabola_exterior 1.2, slit_plane 1, disk_exterior 1.6, rectangle 1.
struct DomainSpec {
    Family family = Family::rectangle;
    int side = 8;
    double alpha = 1.0;
    std::optional<double> truncation_radius;
    std::optional<Eigen::Vector2d> base_point;
    std::optional<double> scale;

    void validate() const;
    Eigen::Vector2d anchor() const;
    Eigen::Vector2d default_base_point() const;
    double resolved_scale() const;
};

struct Edge {
    Index u;
    Index v;
    double conductance;
};

struct Neighbor {
    Index vertex;
    double conductance;
};

// Two-sided slit {y = tip.y, x <= tip.x}; side is +1 / -1 for the upper and
// lower copies of slit vertices and 0 elsewhere.
struct SlitGeometry {
    Eigen::Vector2d tip;
    std::vector<int> side;
};

struct CorkscrewPoint {
    Index xi;
    double r;
    Index xi_r;
};

class DomainGraph {
public:
    DomainGraph(std::vector<Eigen::Vector2d> coords, std::vector<Edge> edges, Eigen::VectorXd measure,
                std::vector<VertexKind> kinds, double mesh, std::optional<SlitGeometry> slit = {},
                Family family = Family::custom);

    Index vertex_count() const { return static_cast<Index>(coords_.size()); }
    const Eigen::Vector2d& coord(Index v) const { return coords_[static_cast<size_t>(v)]; }
    const std::vector<Eigen::Vector2d>& coords() const { return coords_; }
    std::span<const Edge> edges() const { return edges_; }
    const Eigen::VectorXd& measure() const { return measure_; }
    VertexKind kind(Index v) const { return kinds_[static_cast<size_t>(v)]; }
    const std::vector<VertexKind>& kinds() const { return kinds_; }
    double mesh() const { return mesh_; }
    Family family() const { return family_; }
    const std::optional<SlitGeometry>& slit() const { return slit_; }

    const VertexSet& interior() const { return interior_; }
    const VertexSet& boundary() const { return boundary_; }
    const VertexSet& absorbing() const { return absorbing_; }
    // Interior followed by boundary: the vertices of the closed domain.
    VertexSet closed_domain() const;

    // Position of v inside boundary(), or -1.
    Index boundary_position(Index v) const { return boundary_pos_[static_cast<size_t>(v)]; }
    bool is_boundary(Index v) const { return kind(v) == VertexKind::boundary; }
    bool is_interior(Index v) const { return kind(v) == VertexKind::interior; }
    bool is_absorbing(Index v) const { return kind(v) == VertexKind::absorbing; }

    std::span<const Neighbor> neighbors(Index v) const;
    double degree(Index v) const { return degree_[v]; }
    const Eigen::VectorXd& degrees() const { return degree_; }
    double conductance(Index u, Index v) const;

    // Graph Laplacian (L u)(x) = sum_y c_xy (u(x) - u(y)) over every vertex.
    const Eigen::SparseMatrix<double>& laplacian() const { return laplacian_; }

    // Euclidean distance, or the inner (path) metric across a slit.
    double distance(Index u, Index v) const;
    double distance_to_boundary(Index v) const { return boundary_distance_[v]; }
    // Largest distance between two non-absorbing vertices.
    double diameter() const;

    // Non-absorbing vertices at distance < r from center.
    VertexSet ball(Index center, double r) const;
    // Non-absorbing vertices with |d(center, .) - r| <= halfwidth.
    VertexSet sphere(Index center, double r, double halfwidth) const;
    // Nearest vertex (lowest index on ties); slit copies resolve to upper side.
    Index nearest_vertex(const Eigen::Vector2d& p) const;

    bool connected_closed_domain() const;

private:
    template <class Visit>
    void scan_box(const Eigen::Vector2d& centre, double r, Visit&& visit) const;
    long long cell_key(long long cx, long long cy) const { return cx * 2147483647LL + cy; }

    std::vector<Eigen::Vector2d> coords_;
    std::vector<Edge> edges_;
    Eigen::VectorXd measure_;
    std::vector<VertexKind> kinds_;
    double mesh_;
    std::optional<SlitGeometry> slit_;
    Family family_;

    VertexSet interior_, boundary_, absorbing_;
    std::vector<Index> boundary_pos_;
    std::vector<Index> adj_offset_;
    std::vector<Neighbor> adj_;
    Eigen::VectorXd degree_;
    Eigen::VectorXd boundary_distance_;
    std::unordered_map<long long, std::vector<Index>> cells_;
    double diameter_ = 0.0;
    Eigen::SparseMatrix<double> laplacian_;
};

DomainGraph build_domain(const DomainSpec& spec);

// Vertex of the graph matching spec.base_point (or the family default).
Index base_vertex(const DomainGraph& g, const DomainSpec& spec);

CorkscrewPoint corkscrew(const DomainGraph& g, Index xi, double r);

}  // namespace tracelab
