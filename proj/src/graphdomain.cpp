#include "tracelab/graphdomain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace tracelab {

namespace {

constexpr std::pair<Family, std::string_view> kFamilyNames[] = {
    {Family::half_plane, "half_plane"},
    {Family::quadrant, "quadrant"},
    {Family::parabola_exterior, "parabola_exterior"},
    {Family::slit_plane, "slit_plane"},
    {Family::disk_exterior, "disk_exterior"},
    {Family::rectangle, "rectangle"},
    {Family::custom, "custom"},
};

}  // namespace

std::string_view to_string(Family family) {
    for (const auto& [f, name] : kFamilyNames)
        if (f == family) return name;
    return "custom";
}

Family family_from_string(std::string_view name) {
    for (const auto& [f, n] : kFamilyNames)
        if (n == name) return f;
    throw InvalidArgument("unknown domain family '" + std::string(name) + "'");
}

bool is_unbounded(Family family) {
    switch (family) {
    case Family::half_plane:
    case Family::quadrant:
    case Family::parabola_exterior:
    case Family::slit_plane:
    case Family::disk_exterior:
        return true;
    default:
        return false;
    }
}

// ---------------------------------------------------------------------------
// DomainSpec

void DomainSpec::validate() const {
    if (family == Family::custom) throw InvalidArgument("custom domains are built directly, not from a spec");
    const int min_side = family == Family::rectangle ? 2 : 8;
    if (side < min_side) throw InvalidArgument("side must be >= " + std::to_string(min_side));
    if (family == Family::half_plane && !(alpha > 0.0 && alpha < 2.0))
        throw InvalidArgument("half_plane requires alpha in (0,2)");
    if (is_unbounded(family)) {
        if (!truncation_radius) throw InvalidArgument(std::string(to_string(family)) + " requires truncation_radius");
        if (!(*truncation_radius >= 4.0)) throw InvalidArgument("truncation_radius must be >= 4");
    }
    if (scale && !(*scale > 0.0)) throw InvalidArgument("scale must be positive");
}

Eigen::Vector2d DomainSpec::anchor() const {
    const double n = side;
    switch (family) {
    case Family::half_plane:
        return {std::floor(n / 2), 0.0};
    case Family::quadrant:
        return {0.0, 0.0};
    default:
        return {std::floor(n / 2), std::floor(n / 2)};
    }
}

double DomainSpec::resolved_scale() const {
    if (scale) return *scale;
    switch (family) {
    case Family::parabola_exterior:
        return side / 16.0;
    case Family::disk_exterior:
        return truncation_radius ? *truncation_radius / 16.0 : side / 32.0;
    default:
        return 1.0;
    }
}

Eigen::Vector2d DomainSpec::default_base_point() const {
    const Eigen::Vector2d a = anchor();
    const double n = side;
    switch (family) {
    case Family::half_plane:
        return {a.x(), std::max(1.0, std::round(n / 8))};
    case Family::quadrant:
        return {std::max(1.0, std::round(n / 8)), std::max(1.0, std::round(n / 8))};
    case Family::parabola_exterior:
        return {a.x(), a.y() - std::max(1.0, std::round(0.75 * resolved_scale()))};
    case Family::slit_plane:
        return {a.x() + std::max(1.0, std::round(n / 8)), a.y()};
    case Family::disk_exterior:
        return {a.x(), a.y() + std::ceil(2 * resolved_scale())};
    default:
        return a;
    }
}

// ---------------------------------------------------------------------------
// DomainGraph

namespace {

Eigen::SparseMatrix<double> build_laplacian(Index n, std::span<const Edge> edges, const Eigen::VectorXd& degree) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(edges.size() * 2 + static_cast<size_t>(n));
    for (const Edge& e : edges) {
        t.emplace_back(e.u, e.v, -e.conductance);
        t.emplace_back(e.v, e.u, -e.conductance);
    }
    for (Index v = 0; v < n; ++v) t.emplace_back(v, v, degree[v]);
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

}  // namespace

DomainGraph::DomainGraph(std::vector<Eigen::Vector2d> coords, std::vector<Edge> edges, Eigen::VectorXd measure,
                         std::vector<VertexKind> kinds, double mesh, std::optional<SlitGeometry> slit,
                         Family family)
    : coords_(std::move(coords)),
      edges_(std::move(edges)),
      measure_(std::move(measure)),
      kinds_(std::move(kinds)),
      mesh_(mesh),
      slit_(std::move(slit)),
      family_(family) {
    const Index n = vertex_count();
    if (n == 0) throw InvalidArgument("graph has no vertices");
    if (measure_.size() != n || static_cast<Index>(kinds_.size()) != n)
        throw InvalidArgument("coords, measure and kinds must have equal length");
    if (!(mesh_ > 0.0)) throw InvalidArgument("mesh must be positive");
    if ((measure_.array() <= 0.0).any()) throw InvalidArgument("vertex measure must be strictly positive");
    if (slit_ && static_cast<Index>(slit_->side.size()) != n) throw InvalidArgument("slit side vector has wrong length");

    boundary_pos_.assign(static_cast<size_t>(n), -1);
    for (Index v = 0; v < n; ++v) {
        switch (kind(v)) {
        case VertexKind::interior: interior_.push_back(v); break;
        case VertexKind::boundary:
            boundary_pos_[static_cast<size_t>(v)] = static_cast<Index>(boundary_.size());
            boundary_.push_back(v);
            break;
        case VertexKind::absorbing: absorbing_.push_back(v); break;
        }
    }

    std::vector<Index> count(static_cast<size_t>(n), 0);
    for (const Edge& e : edges_) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v)
            throw InvalidArgument("edge endpoints out of range or self-loop");
        if (!(e.conductance > 0.0) || !std::isfinite(e.conductance))
            throw InvalidArgument("conductances must be finite and strictly positive");
        ++count[static_cast<size_t>(e.u)];
        ++count[static_cast<size_t>(e.v)];
    }
    adj_offset_.assign(static_cast<size_t>(n) + 1, 0);
    for (Index v = 0; v < n; ++v) adj_offset_[v + 1] = adj_offset_[v] + count[v];
    adj_.resize(static_cast<size_t>(adj_offset_[n]));
    std::vector<Index> fill(adj_offset_.begin(), adj_offset_.end() - 1);
    degree_ = Eigen::VectorXd::Zero(n);
    for (const Edge& e : edges_) {
        adj_[fill[e.u]++] = {e.v, e.conductance};
        adj_[fill[e.v]++] = {e.u, e.conductance};
        degree_[e.u] += e.conductance;
        degree_[e.v] += e.conductance;
    }
    for (Index v = 0; v < n; ++v) {
        auto first = adj_.begin() + adj_offset_[v], last = adj_.begin() + adj_offset_[v + 1];
        std::sort(first, last, [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
        if (std::adjacent_find(first, last, [](const Neighbor& a, const Neighbor& b) {
                return a.vertex == b.vertex;
            }) != last)
            throw InvalidArgument("duplicate edge");
    }

    for (Index b : boundary_) {
        bool has_interior = false;
        for (const Neighbor& nb : neighbors(b)) has_interior |= is_interior(nb.vertex);
        if (!has_interior) throw InvalidArgument("boundary vertex " + std::to_string(b) + " has no interior neighbor");
    }
    if (!connected_closed_domain()) throw InvalidArgument("interior and boundary do not form a connected graph");
    laplacian_ = build_laplacian(n, edges_, degree_);

    for (Index v = 0; v < n; ++v) {
        const Eigen::Vector2d& p = coords_[v];
        cells_[cell_key(std::llround(std::floor(p.x() / mesh_)), std::llround(std::floor(p.y() / mesh_)))]
            .push_back(v);
    }

    boundary_distance_ = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
    for (Index v = 0; v < n; ++v)
        for (Index b : boundary_) boundary_distance_[v] = std::min(boundary_distance_[v], distance(v, b));

    // Extreme points of a lattice region sit on its outer layer.
    const VertexSet closed = closed_domain();
    VertexSet hull;
    if (closed.size() <= 3000) {
        hull = closed;
    } else {
        for (Index v : closed) {
            bool outer = is_boundary(v) || neighbors(v).size() < 4;
            for (const Neighbor& nb : neighbors(v)) outer |= is_absorbing(nb.vertex);
            if (outer) hull.push_back(v);
        }
    }
    for (size_t i = 0; i < hull.size(); ++i)
        for (size_t j = i + 1; j < hull.size(); ++j) diameter_ = std::max(diameter_, distance(hull[i], hull[j]));
}

VertexSet DomainGraph::closed_domain() const {
    VertexSet out = interior_;
    out.insert(out.end(), boundary_.begin(), boundary_.end());
    return out;
}

std::span<const Neighbor> DomainGraph::neighbors(Index v) const {
    return {adj_.data() + adj_offset_[v], static_cast<size_t>(adj_offset_[v + 1] - adj_offset_[v])};
}

double DomainGraph::conductance(Index u, Index v) const {
    auto nb = neighbors(u);
    auto it = std::lower_bound(nb.begin(), nb.end(), v, [](const Neighbor& a, Index x) { return a.vertex < x; });
    return (it != nb.end() && it->vertex == v) ? it->conductance : 0.0;
}

double DomainGraph::distance(Index u, Index v) const {
    const Eigen::Vector2d& a = coord(u);
    const Eigen::Vector2d& b = coord(v);
    const double euclid = (a - b).norm();
    if (!slit_) return euclid;
    const Eigen::Vector2d& tip = slit_->tip;
    auto side_of = [&](Index w, const Eigen::Vector2d& p) -> int {
        if (int s = slit_->side[static_cast<size_t>(w)]; s != 0) return s;
        return p.y() > tip.y() ? 1 : (p.y() < tip.y() ? -1 : 0);
    };
    const int su = side_of(u, a), sv = side_of(v, b);
    if (su * sv >= 0) return euclid;
    // Opposite sides: the segment meets y = tip.y at one point.
    const double dy = b.y() - a.y();
    const double x_cross = std::abs(dy) > 0.0 ? a.x() + (tip.y() - a.y()) * (b.x() - a.x()) / dy : a.x();
    if (x_cross <= tip.x()) return (a - tip).norm() + (b - tip).norm();
    return euclid;
}

double DomainGraph::diameter() const { return diameter_; }

template <class Visit>
void DomainGraph::scan_box(const Eigen::Vector2d& centre, double r, Visit&& visit) const {
    const long long x0 = std::llround(std::floor((centre.x() - r) / mesh_));
    const long long x1 = std::llround(std::floor((centre.x() + r) / mesh_));
    const long long y0 = std::llround(std::floor((centre.y() - r) / mesh_));
    const long long y1 = std::llround(std::floor((centre.y() + r) / mesh_));
    const bool full = !std::isfinite(r) || static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1) >
                                               static_cast<double>(vertex_count());
    if (full) {
        for (Index v = 0; v < vertex_count(); ++v) visit(v);
        return;
    }
    std::vector<Index> found;
    for (long long cx = x0; cx <= x1; ++cx)
        for (long long cy = y0; cy <= y1; ++cy)
            if (auto it = cells_.find(cell_key(cx, cy)); it != cells_.end())
                found.insert(found.end(), it->second.begin(), it->second.end());
    std::sort(found.begin(), found.end());
    for (Index v : found) visit(v);
}

VertexSet DomainGraph::ball(Index center, double r) const {
    VertexSet out;
    scan_box(coord(center), r, [&](Index v) {
        if (!is_absorbing(v) && distance(center, v) < r) out.push_back(v);
    });
    return out;
}

VertexSet DomainGraph::sphere(Index center, double r, double halfwidth) const {
    VertexSet out;
    scan_box(coord(center), r + halfwidth, [&](Index v) {
        if (!is_absorbing(v) && std::abs(distance(center, v) - r) <= halfwidth) out.push_back(v);
    });
    return out;
}

Index DomainGraph::nearest_vertex(const Eigen::Vector2d& p) const {
    Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    auto consider = [&](Index v) {
        const double d = (coord(v) - p).norm();
        if (d < best_d || (d == best_d && v < best)) {
            best_d = d;
            best = v;
        }
    };
    scan_box(p, 2 * mesh_, consider);
    if (best < 0)
        for (Index v = 0; v < vertex_count(); ++v) consider(v);
    return best;
}

bool DomainGraph::connected_closed_domain() const {
    const VertexSet closed = closed_domain();
    if (closed.empty()) return false;
    std::vector<char> seen(static_cast<size_t>(vertex_count()), 0);
    std::queue<Index> q;
    q.push(closed.front());
    seen[closed.front()] = 1;
    size_t reached = 1;
    while (!q.empty()) {
        const Index v = q.front();
        q.pop();
        for (const Neighbor& nb : neighbors(v)) {
            if (seen[nb.vertex] || is_absorbing(nb.vertex)) continue;
            seen[nb.vertex] = 1;
            ++reached;
            q.push(nb.vertex);
        }
    }
    return reached == closed.size();
}

// ---------------------------------------------------------------------------
// Lattice construction

namespace {

struct LatticeRules {
    std::function<bool(long, long)> inside;
    std::function<bool(long, long)> far;
    std::function<double(long)> weight;  // by row
    bool frame_absorbs = false;
    bool slit = false;
    Eigen::Vector2d anchor;
};

LatticeRules rules_for(const DomainSpec& spec) {
    LatticeRules rules;
    const long n = spec.side;
    const Eigen::Vector2d a = spec.anchor();
    const double ax = a.x(), ay = a.y();
    const double trunc = spec.truncation_radius.value_or(std::numeric_limits<double>::infinity());
    rules.anchor = a;
    rules.inside = [](long, long) { return true; };
    rules.far = [](long, long) { return false; };
    rules.weight = [](long) { return 1.0; };
    auto beyond = [ax, ay, trunc](long i, long j) { return std::hypot(i - ax, j - ay) >= trunc; };

    switch (spec.family) {
    case Family::rectangle:
        rules.inside = [n](long i, long j) { return i >= 0 && j >= 0 && i <= n && j <= n; };
        break;
    case Family::half_plane: {
        const double top = std::min(trunc, static_cast<double>(n));
        const double expo = 1.0 - spec.alpha;
        rules.inside = [](long, long j) { return j >= 0; };
        rules.far = [top](long, long j) { return j >= top; };
        rules.weight = [expo](long j) { return std::pow(std::max(static_cast<double>(j), 0.5), expo); };
        break;
    }
    case Family::quadrant:
        rules.inside = [](long i, long j) { return i >= 0 && j >= 0; };
        rules.far = beyond;
        rules.frame_absorbs = true;
        break;
    case Family::parabola_exterior: {
        const double s = spec.resolved_scale();
        rules.inside = [ax, ay, s](long i, long j) { return (j - ay) * s <= (i - ax) * (i - ax); };
        rules.far = beyond;
        rules.frame_absorbs = true;
        break;
    }
    case Family::disk_exterior: {
        const double rho = spec.resolved_scale();
        rules.inside = [ax, ay, rho](long i, long j) { return std::hypot(i - ax, j - ay) >= rho; };
        rules.far = beyond;
        rules.frame_absorbs = true;
        break;
    }
    case Family::slit_plane:
        rules.far = beyond;
        rules.frame_absorbs = true;
        rules.slit = true;
        break;
    case Family::custom:
        throw InvalidArgument("custom family has no lattice rules");
    }
    return rules;
}

}  // namespace

DomainGraph build_domain(const DomainSpec& spec) {
    spec.validate();
    const LatticeRules rules = rules_for(spec);
    const long n = spec.side;
    const long tip_x = std::lround(rules.anchor.x()), tip_y = std::lround(rules.anchor.y());
    auto on_slit = [&](long i, long j) { return rules.slit && j == tip_y && i < tip_x; };
    auto is_tip = [&](long i, long j) { return rules.slit && j == tip_y && i == tip_x; };
    auto in_frame = [n](long i, long j) { return i >= 0 && j >= 0 && i <= n && j <= n; };
    auto candidate = [&](long i, long j) { return in_frame(i, j) && rules.inside(i, j); };
    constexpr long di[4] = {1, -1, 0, 0};
    constexpr long dj[4] = {0, 0, 1, -1};

    // Provisional classification on the lattice.
    enum class Cls : std::uint8_t { none, interior, boundary, absorbing };
    auto classify = [&](long i, long j) -> Cls {
        if (!candidate(i, j)) return Cls::none;
        if (rules.far(i, j)) {
            for (int k = 0; k < 4; ++k) {
                const long p = i + di[k], q = j + dj[k];
                if (candidate(p, q) && !rules.far(p, q)) return Cls::absorbing;
            }
            return Cls::none;
        }
        if (on_slit(i, j) || is_tip(i, j)) return Cls::boundary;
        for (int k = 0; k < 4; ++k)
            if (!rules.inside(i + di[k], j + dj[k])) return Cls::boundary;
        if (rules.frame_absorbs && (i == 0 || j == 0 || i == n || j == n)) return Cls::absorbing;
        return Cls::interior;
    };

    const long width = n + 1;
    std::vector<Cls> cls(static_cast<size_t>(width * width));
    auto at = [&](long i, long j) -> Cls& { return cls[static_cast<size_t>(j * width + i)]; };
    for (long j = 0; j <= n; ++j)
        for (long i = 0; i <= n; ++i) at(i, j) = classify(i, j);

    // A slit copy only sees its own half plane; the interior neighbours of a
    // boundary vertex are counted accordingly.
    auto has_interior_neighbour = [&](long i, long j, int side) {
        for (int k = 0; k < 4; ++k) {
            const long p = i + di[k], q = j + dj[k];
            if (!in_frame(p, q) || at(p, q) != Cls::interior) continue;
            if (side > 0 && q < j) continue;
            if (side < 0 && q > j) continue;
            return true;
        }
        return false;
    };
    for (long j = 0; j <= n; ++j)
        for (long i = 0; i <= n; ++i)
            if (at(i, j) == Cls::boundary && !on_slit(i, j) && !has_interior_neighbour(i, j, 0))
                at(i, j) = Cls::none;

    // Assign vertex indices, duplicating slit vertices (upper copy first).
    std::vector<Eigen::Vector2d> coords;
    std::vector<VertexKind> kinds;
    std::vector<double> measure;
    std::vector<int> side;
    std::vector<Index> id_main(cls.size(), -1), id_lower(cls.size(), -1);
    auto add_vertex = [&](long i, long j, Cls c, int s) {
        coords.emplace_back(static_cast<double>(i), static_cast<double>(j));
        kinds.push_back(c == Cls::interior ? VertexKind::interior
                                           : (c == Cls::boundary ? VertexKind::boundary : VertexKind::absorbing));
        measure.push_back(rules.weight(j));
        side.push_back(s);
        return static_cast<Index>(coords.size()) - 1;
    };
    for (long j = 0; j <= n; ++j) {
        for (long i = 0; i <= n; ++i) {
            const Cls c = at(i, j);
            if (c == Cls::none) continue;
            const size_t k = static_cast<size_t>(j * width + i);
            if (on_slit(i, j) && c == Cls::boundary) {
                id_main[k] = add_vertex(i, j, c, +1);
                id_lower[k] = add_vertex(i, j, c, -1);
            } else {
                id_main[k] = add_vertex(i, j, c, 0);
            }
        }
    }

    std::vector<Edge> edges;
    auto conductance = [&](long j1, long j2) { return 0.5 * (rules.weight(j1) + rules.weight(j2)); };
    // Copy of a lattice point facing side s (+1 up, -1 down); single vertices ignore s.
    auto pick = [&](long i, long j, int s) {
        const size_t k = static_cast<size_t>(j * width + i);
        return (s > 0 || id_lower[k] < 0) ? id_main[k] : id_lower[k];
    };
    auto duplicated = [&](long i, long j) { return id_lower[static_cast<size_t>(j * width + i)] >= 0; };
    for (long j = 0; j <= n; ++j) {
        for (long i = 0; i <= n; ++i) {
            if (at(i, j) == Cls::none) continue;
            for (int dir = 0; dir < 2; ++dir) {
                const long p = dir == 0 ? i + 1 : i, q = dir == 0 ? j : j + 1;
                if (!in_frame(p, q) || at(p, q) == Cls::none) continue;
                if (at(i, j) == Cls::absorbing && at(p, q) == Cls::absorbing) continue;
                const double c = conductance(j, q);
                if (dir == 1) {
                    edges.push_back({pick(i, j, +1), pick(p, q, -1), c});
                } else if (duplicated(i, j) || duplicated(p, q)) {
                    // Along the slit each side keeps its own chain; the tip joins both.
                    edges.push_back({pick(i, j, +1), pick(p, q, +1), c});
                    edges.push_back({pick(i, j, -1), pick(p, q, -1), c});
                } else {
                    edges.push_back({pick(i, j, 0), pick(p, q, 0), c});
                }
            }
        }
    }

    std::optional<SlitGeometry> slit;
    if (rules.slit) slit = SlitGeometry{rules.anchor, side};
    Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(measure.data(), static_cast<Index>(measure.size()));
    DomainGraph g(std::move(coords), std::move(edges), std::move(m), std::move(kinds), 1.0, std::move(slit),
                  spec.family);
    if (is_unbounded(spec.family) && g.absorbing().empty())
        throw InvalidArgument("truncation produced no absorbing vertices");
    (void)base_vertex(g, spec);
    return g;
}

Index base_vertex(const DomainGraph& g, const DomainSpec& spec) {
    const Eigen::Vector2d p = spec.base_point.value_or(spec.default_base_point());
    const Index v = g.nearest_vertex(p);
    if (v < 0 || (g.coord(v) - p).norm() > 0.5 * g.mesh() || !g.is_interior(v))
        throw InvalidArgument("base_point does not map to an interior vertex");
    return v;
}

CorkscrewPoint corkscrew(const DomainGraph& g, Index xi, double r) {
    if (!g.is_boundary(xi)) throw InvalidArgument("corkscrew: xi must be a boundary vertex");
    if (r < 2 * g.mesh()) throw InvalidArgument("corkscrew: r must be >= 2 mesh");
    if (r >= g.diameter() / 4) throw InvalidArgument("corkscrew: r must be < diam/4");
    // Thin annulus first so that the radius is honoured as closely as the
    // lattice allows; the full mesh-wide annulus is the fallback.
    for (double halfwidth : {0.5 * g.mesh(), g.mesh()}) {
        Index best = -1;
        double best_depth = -1.0;
        for (Index v : g.sphere(xi, r, halfwidth)) {
            if (!g.is_interior(v)) continue;
            const double depth = g.distance_to_boundary(v);
            if (depth > best_depth) {  // sphere() is index-sorted, so ties keep the lowest index
                best_depth = depth;
                best = v;
            }
        }
        if (best >= 0) return {xi, r, best};
    }
    throw Error("corkscrew: no interior vertex in the annulus");
}

}  // namespace tracelab
