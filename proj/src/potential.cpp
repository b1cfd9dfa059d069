#include "tracelab/potential.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <set>

namespace tracelab {

namespace {

std::vector<Index> membership(const DomainGraph& g, const VertexSet& set) {
    std::vector<Index> local(static_cast<size_t>(g.vertex_count()), -1);
    for (size_t i = 0; i < set.size(); ++i) {
        const Index v = set[i];
        if (v < 0 || v >= g.vertex_count()) throw InvalidArgument("vertex index out of range");
        if (local[static_cast<size_t>(v)] >= 0) throw InvalidArgument("vertex listed twice");
        local[static_cast<size_t>(v)] = static_cast<Index>(i);
    }
    return local;
}

// Every connected piece of the set must leak to its complement, otherwise
// the killed generator is singular.
void require_transient(const DomainGraph& g, const VertexSet& set, const std::vector<Index>& local) {
    std::vector<char> seen(set.size(), 0);
    for (size_t start = 0; start < set.size(); ++start) {
        if (seen[start]) continue;
        bool leaks = false;
        std::queue<Index> q;
        q.push(set[start]);
        seen[start] = 1;
        while (!q.empty()) {
            const Index v = q.front();
            q.pop();
            for (const Neighbor& nb : g.neighbors(v)) {
                const Index l = local[static_cast<size_t>(nb.vertex)];
                if (l < 0) {
                    leaks = true;
                } else if (!seen[static_cast<size_t>(l)]) {
                    seen[static_cast<size_t>(l)] = 1;
                    q.push(nb.vertex);
                }
            }
        }
        if (!leaks) throw RecurrenceError();
    }
}

}  // namespace

GreenFunction::GreenFunction(const DomainGraph& g, VertexSet domain, SolverConfig cfg)
    : g_(&g), domain_(std::move(domain)), cache_(std::make_shared<Cache>()) {
    local_ = membership(g, domain_);
    for (Index v : domain_)
        if (g.is_absorbing(v)) throw InvalidArgument("Green domain may not contain absorbing vertices");
    require_transient(g, domain_, local_);
    solver_ = std::make_shared<const SpdSolver>(submatrix(g.laplacian(), domain_, domain_), cfg);
}

Eigen::VectorXd GreenFunction::row(Index x) const {
    if (!contains(x)) return Eigen::VectorXd::Zero(g_->vertex_count());
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->rows.find(x); it != cache_->rows.end()) return it->second;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(domain_.size()));
    rhs[local(x)] = 1.0;
    const Eigen::VectorXd u = solver_->solve(rhs);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(g_->vertex_count());
    for (size_t i = 0; i < domain_.size(); ++i) full[domain_[i]] = u[static_cast<Index>(i)];
    std::lock_guard lock(cache_->mutex);
    return cache_->rows.emplace(x, std::move(full)).first->second;
}

double GreenFunction::operator()(Index x, Index y) const {
    if (!contains(x) || !contains(y)) return 0.0;
    return row(x)[y];
}

KernelMatrix GreenFunction::kernel() const {
    const Index n = static_cast<Index>(domain_.size());
    Eigen::MatrixXd inv = solver_->solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
    inv = 0.5 * (inv + inv.transpose()).eval();
    return {KernelRole::green, domain_, std::move(inv)};
}

GreenFunction green(const DomainGraph& g, const VertexSet& domain, const SolverConfig& cfg) {
    return GreenFunction(g, domain, cfg);
}

GreenFunction interior_green(const DomainGraph& g, const SolverConfig& cfg) {
    return GreenFunction(g, g.interior(), cfg);
}

double dynkin_hunt_check(const DomainGraph& g, const VertexSet& d1, const VertexSet& d2, Index x, Index y,
                         const SolverConfig& cfg) {
    const GreenFunction g1(g, d1, cfg), g2(g, d2, cfg);
    for (Index v : d1)
        if (!g2.contains(v)) throw InvalidArgument("dynkin_hunt_check: D1 must be a subset of D2");
    if (!g1.contains(x) || !g1.contains(y) || x == y)
        throw InvalidArgument("dynkin_hunt_check: x, y must be distinct points of D1");
    const Eigen::VectorXd row1 = g1.row(x);
    const Eigen::VectorXd row2y = g2.row(y);
    // Exit distribution of D1 from x: H(x,z) = sum_{w in D1} g1(x,w) c_wz, z outside D1.
    std::map<Index, double> exit;
    for (Index w : d1)
        for (const Neighbor& nb : g.neighbors(w))
            if (!g1.contains(nb.vertex)) exit[nb.vertex] += row1[w] * nb.conductance;
    double through = 0.0;
    for (const auto& [z, h] : exit) through += h * row2y[z];
    return std::abs(row2y[x] - row1[y] - through);
}

EquilibriumData capacity(const DomainGraph& g, const VertexSet& a, const VertexSet& d, const SolverConfig& cfg) {
    EquilibriumData out;
    out.potential = Eigen::VectorXd::Zero(g.vertex_count());
    if (a.empty()) return out;
    const std::vector<Index> in_d = membership(g, d);
    for (Index v : d)
        if (g.is_absorbing(v)) throw InvalidArgument("capacity: D may not contain absorbing vertices");
    for (Index v : a)
        if (in_d[static_cast<size_t>(v)] < 0)
            throw InvalidArgument("capacity: A meets the Dirichlet region (capacity is infinite)");
    const std::vector<Index> in_a = membership(g, a);

    VertexSet free;
    for (Index v : d)
        if (in_a[static_cast<size_t>(v)] < 0) free.push_back(v);
    for (Index v : a) out.potential[v] = 1.0;
    if (!free.empty()) {
        const std::vector<Index> in_free = membership(g, free);
        require_transient(g, free, in_free);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Index>(free.size()));
        for (size_t i = 0; i < free.size(); ++i)
            for (const Neighbor& nb : g.neighbors(free[i]))
                if (in_a[static_cast<size_t>(nb.vertex)] >= 0) rhs[static_cast<Index>(i)] += nb.conductance;
        const Eigen::VectorXd e = SpdSolver(submatrix(g.laplacian(), free, free), cfg).solve(rhs);
        for (size_t i = 0; i < free.size(); ++i) out.potential[free[i]] = e[static_cast<Index>(i)];
    }

    const Eigen::VectorXd le = g.laplacian() * out.potential;
    out.inner = Eigen::VectorXd(static_cast<Index>(a.size()));
    out.inner_support = a;
    for (size_t i = 0; i < a.size(); ++i) out.inner[static_cast<Index>(i)] = le[a[i]];
    std::set<Index> outside;
    for (Index v : d)
        for (const Neighbor& nb : g.neighbors(v))
            if (in_d[static_cast<size_t>(nb.vertex)] < 0) outside.insert(nb.vertex);
    out.outer_support.assign(outside.begin(), outside.end());
    out.outer = Eigen::VectorXd(static_cast<Index>(out.outer_support.size()));
    for (size_t i = 0; i < out.outer_support.size(); ++i) out.outer[static_cast<Index>(i)] = -le[out.outer_support[i]];
    double energy = 0.0;
    for (const Edge& e : g.edges()) {
        const double diff = out.potential[e.u] - out.potential[e.v];
        energy += e.conductance * diff * diff;
    }
    out.capacity = energy;
    return out;
}

double ball_capacity(const DomainGraph& g, Index xi, double r, double outer_r, const SolverConfig& cfg) {
    return capacity(g, g.ball(xi, r), g.ball(xi, outer_r), cfg).capacity;
}

EstimateReport cdc_check(const DomainGraph& g, const CdcOptions& options, const SolverConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (!(options.a0 > 1.0)) throw InvalidArgument("cdc_check: A0 must exceed 1");
    EstimateReport report;
    report.check = "cdc-check";
    report.columns = {"xi_index", "R", "cap_full", "cap_complement", "ratio"};
    report.key_columns = 2;
    report.predicate = "max ratio <= " + format_real(options.max_ratio);
    const VertexSet& centres = options.centres.empty() ? g.boundary() : options.centres;
    for (double r : options.scales) {
        if (options.a0 * r > g.diameter()) {
            report.warnings.push_back("scale " + format_real(r) + " clipped: A0 R exceeds the diameter");
            continue;
        }
        for (Index xi : centres) {
            const VertexSet d = g.ball(xi, options.a0 * r);
            const VertexSet full = g.ball(xi, r);
            VertexSet comp;
            for (Index v : full)
                if (g.is_boundary(v)) comp.push_back(v);
            const double cap_full = capacity(g, full, d, cfg).capacity;
            const double cap_comp = capacity(g, comp, d, cfg).capacity;
            report.add_row({static_cast<double>(xi), r, cap_full, cap_comp, cap_full / cap_comp});
        }
    }
    report.summarize("ratio");
    report.pass = !report.rows.empty() && report.max_ratio <= options.max_ratio;
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace tracelab
