#pragma once

#include "graphflow/catalog.hpp"
#include "graphflow/fat_graph.hpp"
#include "graphflow/manifold.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

// shared helpers for the unit tests and the acceptance runner

namespace support {

inline std::string fx(const std::string& name) { return "fixtures/" + name; }

// random connected fat graph, 1..6 vertices, V..12 edges. E >= V keeps
// some vertex at valence >= 2 so a basepoint exists.
inline graphflow::FatGraph random_fat_graph(std::mt19937& rng) {
    using graphflow::Edge;
    int nv = std::uniform_int_distribution<int>(1, 6)(rng);
    int ne = std::uniform_int_distribution<int>(nv, 12)(rng);
    graphflow::FatGraph fg;
    graphflow::OrientedGraph& g = fg.graph;
    for (int i = 1; i <= nv; i++) g.vertices.push_back("v" + std::to_string(i));
    char buf[16];
    int made = 0;
    // spanning tree first so the graph stays connected
    for (int i = 1; i < nv; i++) {
        int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
        bool flip = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
        std::snprintf(buf, sizeof buf, "e%02d", ++made);
        if (flip)
            g.edges.push_back({buf, g.vertices[i], g.vertices[j]});
        else
            g.edges.push_back({buf, g.vertices[j], g.vertices[i]});
    }
    std::uniform_int_distribution<int> any(0, nv - 1);
    while (made < ne) {
        std::snprintf(buf, sizeof buf, "e%02d", ++made);
        g.edges.push_back({buf, g.vertices[any(rng)], g.vertices[any(rng)]});
    }
    for (const std::string& v : g.vertices)
        if (g.valence(v) >= 2) {
            g.basepoint = v;
            break;
        }
    for (const std::string& v : g.vertices) {
        std::vector<graphflow::HalfEdge> around;
        for (const Edge& e : g.edges) {
            if (e.src == v) around.push_back({e.id, true});
            if (e.dst == v) around.push_back({e.id, false});
        }
        std::shuffle(around.begin(), around.end(), rng);
        fg.cyclic[v] = around;
    }
    fg.validate();
    return fg;
}

// empty string when every boundary-cycle law holds, else the violation
inline std::string fat_graph_law_violation(const graphflow::FatGraph& fg) {
    using graphflow::OrientedEdge;
    graphflow::BoundaryCyclePartition part = graphflow::boundary_cycles(fg);
    std::map<OrientedEdge, int> seen;
    size_t total = 0;
    for (size_t i = 0; i < part.cycles.size(); i++)
        for (const OrientedEdge& o : part.cycles[i]) {
            seen[o]++;
            total++;
            if (part.cycle_of(o) != static_cast<int>(i))
                return "cycle_of disagrees with the partition";
        }
    if (total != 2 * fg.graph.edges.size()) return "partition misses oriented edges";
    for (const auto& [o, n] : seen)
        if (n != 1) return "oriented edge repeated: " + to_string(o);
    for (const graphflow::Edge& e : fg.graph.edges)
        if (!seen.count({e.id, true}) || !seen.count({e.id, false}))
            return "edge absent from the partition: " + e.id;
    graphflow::SurfaceInvariants inv = graphflow::surface_invariants(fg);
    int V = static_cast<int>(fg.graph.vertices.size());
    int E = static_cast<int>(fg.graph.edges.size());
    if (inv.chi != V - E) return "chi is not V - E";
    if (inv.boundary != static_cast<int>(part.cycles.size())) return "boundary count mismatch";
    if (inv.genus < 0) return "negative genus";
    if (2 - 2 * inv.genus - inv.boundary != inv.chi) return "chi = 2 - 2g - n fails";
    return "";
}

// five-point geodesic stencils through Manifold::retract; the retraction
// is the exponential map, so these converge to covariant derivatives
inline double fd_directional(const graphflow::Manifold& m, const graphflow::CompiledFunction& fn,
                             const graphflow::P3& p, const graphflow::V2& dir, double h) {
    auto f = [&](double s) { return fn.f(m.retract(p, {dir[0] * s, dir[1] * s})); };
    return (8 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12 * h);
}

inline double fd_second(const graphflow::Manifold& m, const graphflow::CompiledFunction& fn,
                        const graphflow::P3& p, const graphflow::V2& dir, double h) {
    auto f = [&](double s) { return fn.f(m.retract(p, {dir[0] * s, dir[1] * s})); };
    return (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
}

// chart Hessian by polarization of second directional derivatives
inline std::array<double, 4> fd_hess(const graphflow::Manifold& m,
                                     const graphflow::CompiledFunction& fn,
                                     const graphflow::P3& p, double h) {
    double dxx = fd_second(m, fn, p, {1, 0}, h);
    double dyy = fd_second(m, fn, p, {0, 1}, h);
    double dmix = fd_second(m, fn, p, {1, 1}, h);
    double dxy = (dmix - dxx - dyy) / 2;
    return {dxx, dxy, dxy, dyy};
}

// worst-case relative derivative error at one point
inline double derivative_error(const graphflow::Manifold& m, const graphflow::CompiledFunction& fn,
                               const graphflow::P3& p, double h = 5e-3) {
    auto basis = m.tangent_basis(p);
    graphflow::P3 g = fn.grad(p);
    double gnorm = graphflow::norm3(g);
    double worst = 0;
    for (int i = 0; i < 2; i++) {
        graphflow::V2 dir{i == 0 ? 1.0 : 0.0, i == 0 ? 0.0 : 1.0};
        double fd = fd_directional(m, fn, p, dir, h);
        double an = graphflow::dot3(g, basis[i]);
        worst = std::max(worst, std::abs(fd - an) / std::max(1.0, gnorm));
    }
    std::array<double, 4> ha = fn.hess_chart(p, basis);
    std::array<double, 4> hf = fd_hess(m, fn, p, h);
    double hnorm = 0;
    for (double x : ha) hnorm += x * x;
    hnorm = std::sqrt(hnorm);
    for (int k = 0; k < 4; k++)
        worst = std::max(worst, std::abs(hf[k] - ha[k]) / std::max(1.0, hnorm));
    return worst;
}

// Hausdorff-style distance between two point sets under the chart metric
inline double set_distance(const graphflow::Manifold& m, const std::vector<graphflow::P3>& a,
                           const std::vector<graphflow::P3>& b) {
    if (a.size() != b.size()) return 1e9;
    double worst = 0;
    for (const graphflow::P3& p : a) {
        double best = 1e9;
        for (const graphflow::P3& q : b) best = std::min(best, m.dist(p, q));
        worst = std::max(worst, best);
    }
    for (const graphflow::P3& q : b) {
        double best = 1e9;
        for (const graphflow::P3& p : a) best = std::min(best, m.dist(p, q));
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace support
