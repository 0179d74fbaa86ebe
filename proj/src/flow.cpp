#include "graphflow/flow.hpp"

#include "graphflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace graphflow {

namespace {

struct UnionFind {
    std::map<std::string, std::string> parent;
    std::string find(const std::string& v) {
        auto it = parent.find(v);
        if (it == parent.end()) {
            parent[v] = v;
            return v;
        }
        if (it->second == v) return v;
        std::string root = find(it->second);
        parent[v] = root;
        return root;
    }
    bool join(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[ra] = rb;
        return true;
    }
};

double norm_inf(const std::vector<double>& r) {
    double m = 0;
    for (double v : r) m = std::max(m, std::fabs(v));
    return m;
}

double norm_l2(const std::vector<double>& r) {
    double s = 0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
}

// eigenvalues of [[a,b],[b,c]], ascending
std::array<double, 2> sym2_eigs(double a, double b, double c) {
    double mid = 0.5 * (a + c);
    double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    return {mid - disc, mid + disc};
}

}  // namespace

CycleData spanning_tree(const OrientedGraph& g) {
    CycleData cd;
    UnionFind uf;
    for (const Edge& e : g.edges) {  // edges arrive sorted by id
        if (uf.join(e.src, e.dst))
            cd.tree_edges.insert(e.id);
        else
            cd.cycle_edges.push_back(e.id);
    }
    return cd;
}

CycleData spanning_tree(const OrientedGraph& g, const std::set<std::string>& forced) {
    UnionFind uf;
    for (const std::string& id : forced) {
        const Edge* e = g.find_edge(id);
        if (!e) throw domain_error("unknown edge in spanning tree: " + id);
        if (!uf.join(e->src, e->dst)) throw domain_error("forced spanning tree contains a cycle");
    }
    if (forced.size() != g.vertices.size() - 1)
        throw domain_error("forced edge set is not a spanning tree");
    CycleData cd;
    cd.tree_edges = forced;
    for (const Edge& e : g.edges)
        if (!forced.count(e.id)) cd.cycle_edges.push_back(e.id);
    return cd;
}

void SolverConfig::apply(Tolerances& t) const {
    if (seed_grid) t.seed_grid = *seed_grid;
    if (newton_tol) t.newton_tol = *newton_tol;
    if (newton_maxiter) t.newton_maxiter = *newton_maxiter;
    if (dedup_radius) t.dedup_sol = *dedup_radius;
}

SolverConfig parse_solver_config(const std::string& text) {
    SolverConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string s = line.substr(b, e - b + 1);
        auto eq = s.find('=');
        if (eq == std::string::npos) throw parse_error("expected key=value", lineno);
        std::string key = s.substr(0, eq);
        std::string val = s.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        auto vb = val.find_first_not_of(" \t");
        val = vb == std::string::npos ? "" : val.substr(vb);
        try {
            if (key == "seed.grid")
                cfg.seed_grid = std::stoi(val);
            else if (key == "newton.tol")
                cfg.newton_tol = std::stod(val);
            else if (key == "newton.maxiter")
                cfg.newton_maxiter = std::stoi(val);
            else if (key == "dedup.radius")
                cfg.dedup_radius = std::stod(val);
            else if (key.rfind("constraint.", 0) == 0)
                cfg.constraints.push_back({key.substr(11), val});
            else
                throw parse_error("unknown solver key: " + key, lineno);
        } catch (const std::invalid_argument&) {
            throw parse_error("bad value for " + key + ": " + val, lineno);
        }
    }
    return cfg;
}

SolverConfig load_solver_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_solver_config(ss.str());
}

namespace {

// shoot one separatrix branch from just off the saddle until it settles
// near some other critical point or runs out the clock; every 4th sample
// is kept plus the final point
void shoot_branch(const MorseBackend& mb, const std::vector<CriticalPoint>& crits,
                  const CriticalPoint& c, const V2& dir, bool forward, std::vector<P3>& out) {
    const Manifold& m = mb.manifold;
    const double delta = 1e-4;
    P3 x = m.retract(c.location, {delta * dir[0], delta * dir[1]});
    double h = mb.tol.h;
    long long steps = std::llround(mb.tol.t_max / h);
    for (long long i = 0; i < steps; i++) {
        x = flow_point(mb, x, forward ? h : -h);
        if (i % 4 == 0) out.push_back(x);
        bool settled = false;
        for (const auto& o : crits)
            if (o.id != c.id && m.dist(x, o.location) < mb.tol.eps_limit) settled = true;
        if (settled) break;
    }
    if (out.empty() || m.dist(out.back(), x) > 1e-12) out.push_back(x);
}

WCurve shoot_separatrix(const MorseBackend& mb, const std::vector<CriticalPoint>& crits,
                        const CriticalPoint& c, bool unstable) {
    // the unstable curve leaves the saddle along the forward flow, the
    // stable one along the backward flow
    V2 dir = unstable ? c.unstable_dir : c.stable_dir;
    std::vector<P3> plus, minus;
    shoot_branch(mb, crits, c, dir, unstable, plus);
    shoot_branch(mb, crits, c, {-dir[0], -dir[1]}, unstable, minus);
    WCurve w;
    w.pts.reserve(plus.size() + minus.size() + 1);
    for (auto it = minus.rbegin(); it != minus.rend(); ++it) w.pts.push_back(*it);
    w.pts.push_back(c.location);
    for (const auto& p : plus) w.pts.push_back(p);
    return w;
}

// signed chart distance from y to the polyline; the sign flips across the
// curve, which is what a Newton step needs
double signed_curve_distance(const Manifold& m, const WCurve& w, const P3& y) {
    size_t best = 0;
    double bestd = 1e100;
    for (size_t i = 0; i < w.pts.size(); i++) {
        double d = m.dist(w.pts[i], y);
        if (d < bestd) {
            bestd = d;
            best = i;
        }
    }
    // project onto the segments adjacent to the nearest stored vertex, in
    // the chart at that vertex
    V2 p = m.chart_diff(w.pts[best], y);
    double best2 = 1e100;
    double sign = 1.0;
    auto consider = [&](const V2& b, bool flip) {
        double den = b[0] * b[0] + b[1] * b[1];
        if (den < 1e-30) return;
        double t = std::clamp((p[0] * b[0] + p[1] * b[1]) / den, 0.0, 1.0);
        V2 d{p[0] - t * b[0], p[1] - t * b[1]};
        double d2 = d[0] * d[0] + d[1] * d[1];
        if (d2 < best2) {
            best2 = d2;
            double cross = b[0] * d[1] - b[1] * d[0];
            if (flip) cross = -cross;
            sign = cross >= 0 ? 1.0 : -1.0;
        }
    };
    if (best + 1 < w.pts.size()) consider(m.chart_diff(w.pts[best], w.pts[best + 1]), false);
    if (best > 0) consider(m.chart_diff(w.pts[best], w.pts[best - 1]), true);
    if (best2 == 1e100) best2 = p[0] * p[0] + p[1] * p[1];
    return sign * std::sqrt(best2);
}

StructureCache make_cache(const MetricStructure& s, const Backend& b) {
    StructureCache c;
    std::set<std::string> keys;
    for (const Edge& e : s.graph.edges) {
        auto it = s.labels.find(e.id);
        if (it == s.labels.end()) throw domain_error("edge " + e.id + " has no function label");
        keys.insert(it->second);
    }
    for (const std::string& k : keys) {
        c.backends.emplace(k, make_morse_backend(b, k));
        c.crit_sets[k] = find_critical_points(c.backends.at(k));
    }
    for (const std::string& k : keys)
        for (const CriticalPoint& cp : c.crit_sets[k]) {
            if (cp.index != 1) continue;
            c.curves[k + "|" + cp.id + "|u"] =
                shoot_separatrix(c.backends.at(k), c.crit_sets[k], cp, true);
            c.curves[k + "|" + cp.id + "|s"] =
                shoot_separatrix(c.backends.at(k), c.crit_sets[k], cp, false);
        }
    return c;
}

}  // namespace

StructureCache build_structure_cache(const MetricStructure& s, const Backend& b) {
    return make_cache(s, b);
}

FlowProblem::FlowProblem(const MetricStructure& s, const Backend& b,
                         const std::vector<LeafConstraint>& constraints,
                         const StructureCache* cache)
    : s_(&s), b_(&b) {
    s.graph.validate();
    s.validate();
    if (cache) {
        cache_ = cache;
    } else {
        owned_cache_ = std::make_unique<StructureCache>(make_cache(s, b));
        cache_ = owned_cache_.get();
    }
    cycles_ = spanning_tree(s.graph);
    build_plan();

    for (const std::string& v : s.graph.vertices)
        if (!s.graph.is_leaf_vertex(v)) {
            junction_id_[v] = static_cast<int>(junctions_.size());
            junctions_.push_back(v);
        }
    if (junctions_.empty()) throw domain_error("structure has no interior vertex");
    for (const Edge& e : s.graph.edges)
        if (junction_id_.count(e.src) && junction_id_.count(e.dst)) inner_edges_.push_back(e.id);
    std::sort(inner_edges_.begin(), inner_edges_.end());

    std::vector<LeafConstraint> sorted = constraints;
    std::sort(sorted.begin(), sorted.end(),
              [](const LeafConstraint& a, const LeafConstraint& c) { return a.leaf < c.leaf; });
    for (const auto& lc : sorted) {
        if (!s.graph.is_leaf_vertex(lc.leaf))
            throw domain_error("constraint on non-leaf vertex: " + lc.leaf);
        const Edge& e = s.graph.leaf_edge(lc.leaf);
        Constraint c;
        c.lc = lc;
        c.incoming = s.graph.leaves.at(lc.leaf);
        c.attach = (e.src == lc.leaf) ? e.dst : e.src;
        if (!junction_id_.count(c.attach))
            throw domain_error("leaf edge " + e.id + " joins two leaves");
        c.key = s.labels.at(e.id);
        for (const auto& cp : cache_->crit_sets.at(c.key))
            if (cp.id == lc.crit) c.crit = &cp;
        if (!c.crit)
            throw domain_error("unknown critical point " + lc.crit + " for function " + c.key);
        // incoming leaves land on unstable manifolds (codim d - index),
        // outgoing ones on stable manifolds (codim index)
        c.equations = c.incoming ? dimension() - c.crit->index : c.crit->index;
        if (c.equations == 1) {
            const std::string side = c.incoming ? "u" : "s";
            c.curve = &cache_->curves.at(c.key + "|" + c.crit->id + "|" + side);
        }
        cons_.push_back(c);
    }
}

void FlowProblem::force_spanning_tree(const std::set<std::string>& edges) {
    cycles_ = spanning_tree(s_->graph, edges);
    build_plan();
}

void FlowProblem::build_plan() {
    plan_.clear();
    const OrientedGraph& g = s_->graph;
    std::set<std::string> reached{g.basepoint};
    std::vector<std::string> frontier{g.basepoint};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const std::string& v : frontier) {
            for (const Edge& e : g.edges) {
                if (!cycles_.tree_edges.count(e.id)) continue;
                if (e.src == v && !reached.count(e.dst)) {
                    plan_.push_back({e.id, true});
                    reached.insert(e.dst);
                    next.push_back(e.dst);
                } else if (e.dst == v && !reached.count(e.src)) {
                    plan_.push_back({e.id, false});
                    reached.insert(e.src);
                    next.push_back(e.src);
                }
            }
        }
        frontier = std::move(next);
    }
    if (reached.size() != g.vertices.size())
        throw invariant_error("spanning tree does not reach every vertex");
}

int FlowProblem::equation_count() const {
    int m = 2 * static_cast<int>(cycles_.cycle_edges.size());
    for (const auto& c : cons_) m += c.equations;
    return m;
}

const std::vector<CriticalPoint>& FlowProblem::critical_points(const std::string& key) const {
    return cache_->crit_sets.at(key);
}

const MorseBackend& FlowProblem::backend_for(const std::string& key) const {
    return cache_->backends.at(key);
}

const Tolerances& FlowProblem::tol() const { return b_->tol; }

std::map<std::string, P3> FlowProblem::propagate(const P3& x) const {
    const Manifold& m = b_->manifold;
    std::map<std::string, P3> values;
    values[s_->graph.basepoint] = m.canonicalize(m.project(x));
    for (const auto& [eid, fwd] : plan_) {
        const Edge* e = s_->graph.find_edge(eid);
        const MorseBackend& mb = cache_->backends.at(s_->labels.at(eid));
        double len = s_->length(eid);
        if (fwd)
            values[e->dst] = flow_point(mb, values.at(e->src), len);
        else
            values[e->src] = flow_point(mb, values.at(e->dst), -len);
    }
    return values;
}

std::vector<double> FlowProblem::cycle_residual_part(const P3& x) const {
    auto values = propagate(x);
    std::vector<double> r;
    const Manifold& m = b_->manifold;
    for (const std::string& id : cycles_.cycle_edges) {
        const Edge* e = s_->graph.find_edge(id);
        const MorseBackend& mb = cache_->backends.at(s_->labels.at(id));
        P3 flowed = flow_point(mb, values.at(e->src), s_->length(id));
        V2 diff = m.chart_diff(values.at(e->dst), flowed);
        r.push_back(diff[0]);
        r.push_back(diff[1]);
    }
    return r;
}

std::vector<double> FlowProblem::residual(const P3& x) const {
    auto values = propagate(x);
    std::vector<double> r;
    const Manifold& m = b_->manifold;
    for (const std::string& id : cycles_.cycle_edges) {
        const Edge* e = s_->graph.find_edge(id);
        const MorseBackend& mb = cache_->backends.at(s_->labels.at(id));
        P3 flowed = flow_point(mb, values.at(e->src), s_->length(id));
        V2 diff = m.chart_diff(values.at(e->dst), flowed);
        r.push_back(diff[0]);
        r.push_back(diff[1]);
    }
    for (const auto& c : cons_) {
        if (c.equations == 0) continue;
        const P3& at = values.at(c.attach);
        if (c.equations == 2) {
            V2 diff = m.chart_diff(c.crit->location, at);
            r.push_back(diff[0]);
            r.push_back(diff[1]);
        } else {
            r.push_back(signed_curve_distance(m, *c.curve, at));
        }
    }
    return r;
}

std::vector<double> FlowProblem::shoot_residual(const std::vector<P3>& vals) const {
    const Manifold& m = b_->manifold;
    std::vector<double> r;
    for (const std::string& id : inner_edges_) {
        const Edge* e = s_->graph.find_edge(id);
        const MorseBackend& mb = cache_->backends.at(s_->labels.at(id));
        P3 flowed = flow_point(mb, vals[junction_id_.at(e->src)], s_->length(id));
        V2 diff = m.chart_diff(vals[junction_id_.at(e->dst)], flowed);
        r.push_back(diff[0]);
        r.push_back(diff[1]);
    }
    for (const auto& c : cons_) {
        if (c.equations == 0) continue;
        const P3& at = vals[junction_id_.at(c.attach)];
        if (c.equations == 2) {
            V2 diff = m.chart_diff(c.crit->location, at);
            r.push_back(diff[0]);
            r.push_back(diff[1]);
        } else {
            r.push_back(signed_curve_distance(m, *c.curve, at));
        }
    }
    return r;
}

std::vector<double> FlowProblem::shooting_residual(const std::map<std::string, P3>& values) const {
    std::vector<P3> vals(junctions_.size());
    for (size_t i = 0; i < junctions_.size(); i++) {
        auto it = values.find(junctions_[i]);
        if (it == values.end()) throw domain_error("missing value for vertex " + junctions_[i]);
        vals[i] = it->second;
    }
    return shoot_residual(vals);
}

std::vector<std::vector<double>> FlowProblem::shoot_jacobian(const std::vector<P3>& vals) const {
    const Manifold& m = b_->manifold;
    const double h = 1e-6;
    std::vector<std::vector<double>> cols;
    std::vector<P3> probe = vals;
    for (size_t k = 0; k < vals.size(); k++)
        for (int a = 0; a < 2; a++) {
            V2 step{0, 0};
            step[a] = h;
            probe[k] = m.retract(vals[k], step);
            std::vector<double> rp = shoot_residual(probe);
            step[a] = -h;
            probe[k] = m.retract(vals[k], step);
            std::vector<double> rm = shoot_residual(probe);
            probe[k] = vals[k];
            std::vector<double> col(rp.size());
            for (size_t i = 0; i < rp.size(); i++) col[i] = (rp[i] - rm[i]) / (2 * h);
            cols.push_back(std::move(col));
        }
    return cols;
}

P3 FlowProblem::basepoint_value(const std::vector<P3>& vals) const {
    const std::string& bp = s_->graph.basepoint;
    auto it = junction_id_.find(bp);
    if (it != junction_id_.end()) return vals[it->second];
    // a basepoint that is itself a leaf: sample its edge from the interior end
    const Edge& e = s_->graph.leaf_edge(bp);
    const MorseBackend& mb = cache_->backends.at(s_->labels.at(e.id));
    double len = s_->length(e.id);
    const P3& at = vals[junction_id_.at(e.src == bp ? e.dst : e.src)];
    return flow_point(mb, at, e.src == bp ? -len : len);
}

std::vector<std::pair<std::string, bool>> FlowProblem::inner_plan(
    std::vector<std::string> roots) const {
    std::vector<std::pair<std::string, bool>> plan;
    std::set<std::string> reached(roots.begin(), roots.end());
    std::vector<std::string> frontier = std::move(roots);
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const std::string& v : frontier)
            for (const std::string& id : inner_edges_) {
                const Edge* e = s_->graph.find_edge(id);
                if (e->src == v && !reached.count(e->dst)) {
                    plan.push_back({id, true});
                    reached.insert(e->dst);
                    next.push_back(e->dst);
                } else if (e->dst == v && !reached.count(e->src)) {
                    plan.push_back({id, false});
                    reached.insert(e->src);
                    next.push_back(e->src);
                }
            }
        frontier = std::move(next);
    }
    if (reached.size() != junctions_.size())
        throw invariant_error("interior subgraph is not connected");
    return plan;
}

namespace {

// Gaussian elimination with partial pivoting; false when a pivot collapses
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> rhs,
                 std::vector<double>& out) {
    const size_t n = A.size();
    for (size_t k = 0; k < n; k++) {
        size_t piv = k;
        for (size_t i = k + 1; i < n; i++)
            if (std::fabs(A[i][k]) > std::fabs(A[piv][k])) piv = i;
        if (std::fabs(A[piv][k]) < 1e-30) return false;
        std::swap(A[piv], A[k]);
        std::swap(rhs[piv], rhs[k]);
        for (size_t i = k + 1; i < n; i++) {
            double f = A[i][k] / A[k][k];
            for (size_t j = k; j < n; j++) A[i][j] -= f * A[k][j];
            rhs[i] -= f * rhs[k];
        }
    }
    out.assign(n, 0.0);
    for (size_t k = n; k-- > 0;) {
        double s = rhs[k];
        for (size_t j = k + 1; j < n; j++) s -= A[k][j] * out[j];
        out[k] = s / A[k][k];
    }
    return true;
}

// eigenvalues of a small symmetric matrix by cyclic Jacobi, ascending
std::vector<double> sym_eigs(std::vector<std::vector<double>> A) {
    const size_t n = A.size();
    for (int sweep = 0; sweep < 64; sweep++) {
        double off = 0, frob = 0;
        for (size_t i = 0; i < n; i++)
            for (size_t j = 0; j < n; j++) {
                frob += A[i][j] * A[i][j];
                if (j > i) off += A[i][j] * A[i][j];
            }
        if (off <= 1e-26 * (1 + frob)) break;
        for (size_t p = 0; p < n; p++)
            for (size_t q = p + 1; q < n; q++) {
                if (A[p][q] == 0) continue;
                double theta = (A[q][q] - A[p][p]) / (2 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double cth = 1 / std::sqrt(t * t + 1), sth = t * cth;
                for (size_t k = 0; k < n; k++) {
                    double akp = A[k][p], akq = A[k][q];
                    A[k][p] = cth * akp - sth * akq;
                    A[k][q] = sth * akp + cth * akq;
                }
                for (size_t k = 0; k < n; k++) {
                    double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = cth * apk - sth * aqk;
                    A[q][k] = sth * apk + cth * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (size_t i = 0; i < n; i++) ev[i] = A[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace

// Levenberg damped Gauss-Newton over all junction values at once; returns
// true when the sup norm of the residual drops below tol
bool FlowProblem::polish(std::vector<P3>& vals) const {
    const Manifold& m = b_->manifold;
    const Tolerances& t = b_->tol;
    const size_t n = 2 * vals.size();
    std::vector<double> r = shoot_residual(vals);
    double rn2 = norm_l2(r);
    double mu = 1e-3;
    for (int iter = 0; iter < t.newton_maxiter; iter++) {
        if (norm_inf(r) < t.newton_tol) return true;
        if (norm_inf(r) > 1e3) return false;
        auto J = shoot_jacobian(vals);
        std::vector<double> g(n, 0.0);
        std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
        for (size_t p = 0; p < n; p++) {
            for (size_t i = 0; i < r.size(); i++) g[p] += J[p][i] * r[i];
            for (size_t q = p; q < n; q++) {
                double acc = 0;
                for (size_t i = 0; i < r.size(); i++) acc += J[p][i] * J[q][i];
                G[p][q] = G[q][p] = acc;
            }
        }
        bool stepped = false;
        for (int retry = 0; retry < 8; retry++) {
            std::vector<std::vector<double>> A = G;
            std::vector<double> rhs(n);
            for (size_t p = 0; p < n; p++) {
                A[p][p] += mu;
                rhs[p] = -g[p];
            }
            std::vector<double> s;
            if (!solve_dense(std::move(A), std::move(rhs), s)) {
                mu = mu * 4 + 1e-12;
                continue;
            }
            std::vector<P3> cand(vals.size());
            for (size_t k = 0; k < vals.size(); k++)
                cand[k] = m.retract(vals[k], {s[2 * k], s[2 * k + 1]});
            std::vector<double> rn = shoot_residual(cand);
            double n2 = norm_l2(rn);
            if (n2 < rn2) {
                vals = std::move(cand);
                r = std::move(rn);
                rn2 = n2;
                mu = std::max(mu / 3, 1e-12);
                stepped = true;
                break;
            }
            mu *= 4;
        }
        if (!stepped) break;
    }
    return norm_inf(r) < t.newton_tol;
}

int FlowProblem::rank_at(const std::vector<P3>& vals, double sv_rel_tol) const {
    auto J = shoot_jacobian(vals);
    const size_t n = J.size();
    std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
    for (size_t p = 0; p < n; p++)
        for (size_t q = p; q < n; q++) {
            double acc = 0;
            for (size_t i = 0; i < J[p].size(); i++) acc += J[p][i] * J[q][i];
            G[p][q] = G[q][p] = acc;
        }
    auto eigs = sym_eigs(G);
    double smax = std::sqrt(std::max(0.0, eigs.back()));
    double cut = sv_rel_tol * std::max(1.0, smax);
    int rank = 0;
    for (double ev : eigs)
        if (std::sqrt(std::max(0.0, ev)) > cut) rank++;
    return rank;
}

int FlowProblem::jacobian_rank(const std::map<std::string, P3>& values, double sv_rel_tol) const {
    std::vector<P3> vals(junctions_.size());
    for (size_t i = 0; i < junctions_.size(); i++) {
        auto it = values.find(junctions_[i]);
        if (it == values.end()) throw domain_error("missing value for vertex " + junctions_[i]);
        vals[i] = it->second;
    }
    return rank_at(vals, sv_rel_tol);
}

int FlowProblem::jacobian_rank(const P3& x, double sv_rel_tol) const {
    auto values = propagate(x);
    std::vector<P3> vals(junctions_.size());
    for (size_t i = 0; i < junctions_.size(); i++) vals[i] = values.at(junctions_[i]);
    return rank_at(vals, sv_rel_tol);
}

bool FlowProblem::classify_open_cells(const std::vector<P3>& vals,
                                      std::map<std::string, std::string>& limits) const {
    for (const auto& c : cons_) {
        if (c.equations == 0) {
            // full-dimensional cell: the attachment value must sit in the
            // right basin, found by flowing out along the leaf direction
            std::string id;
            try {
                id = limit_critical_point(cache_->backends.at(c.key), cache_->crit_sets.at(c.key),
                                          vals[junction_id_.at(c.attach)], !c.incoming);
            } catch (const domain_error&) {
                return false;
            }
            if (id != c.lc.crit) return false;
            limits[c.lc.leaf] = id;
        } else {
            limits[c.lc.leaf] = c.lc.crit;
        }
    }
    return true;
}

std::vector<std::vector<P3>> FlowProblem::candidate_seeds(bool parallel) const {
    const Manifold& m = b_->manifold;
    const Tolerances& t = b_->tol;
    // chart pins determine their junctions outright: set them, fill the rest
    // of the interior by propagation, and let the polish pass judge
    std::vector<std::string> pinned;
    std::vector<P3> pv(junctions_.size());
    for (const auto& c : cons_)
        if (c.equations == 2 && !std::count(pinned.begin(), pinned.end(), c.attach)) {
            pv[junction_id_.at(c.attach)] = c.crit->location;
            pinned.push_back(c.attach);
        }
    if (!pinned.empty()) {
        for (const auto& [id, fwd] : inner_plan(std::move(pinned))) {
            const Edge* e = s_->graph.find_edge(id);
            const MorseBackend& mb = cache_->backends.at(s_->labels.at(id));
            double len = s_->length(id);
            if (fwd)
                pv[junction_id_.at(e->dst)] = flow_point(mb, pv[junction_id_.at(e->src)], len);
            else
                pv[junction_id_.at(e->src)] = flow_point(mb, pv[junction_id_.at(e->dst)], -len);
        }
        polish(pv);
        return {pv};
    }

    // one seed family per propagation root: the grid walks that junction and
    // the rest of the interior follows through the edges, so whichever
    // junction carries the tight constraints gets sampled directly by some
    // family even when the connecting flow maps are strongly contracting
    std::vector<P3> grid = m.seed_points(t.seed_grid);
    const size_t nroots = equation_count() == 0 ? 1 : junctions_.size();
    std::vector<std::vector<P3>> seeds;
    seeds.reserve(nroots * grid.size());
    for (size_t root = 0; root < nroots; root++) {
        auto plan = inner_plan({junctions_[root]});
        for (const P3& g : grid) {
            std::vector<P3> v(junctions_.size());
            v[root] = g;
            for (const auto& [id, fwd] : plan) {
                const Edge* e = s_->graph.find_edge(id);
                const MorseBackend& mb = cache_->backends.at(s_->labels.at(id));
                double len = s_->length(id);
                if (fwd)
                    v[junction_id_.at(e->dst)] = flow_point(mb, v[junction_id_.at(e->src)], len);
                else
                    v[junction_id_.at(e->src)] = flow_point(mb, v[junction_id_.at(e->dst)], -len);
            }
            seeds.push_back(std::move(v));
        }
    }
    if (equation_count() == 0) return seeds;

    std::vector<size_t> picked;
    if (m.kind() == ManifoldKind::torus) {
        // coarse-to-fine on the regular grid: every solution basin the grid
        // resolves contains a 4-neighbourhood local minimum of the residual
        // within its own family, so polishing only those keeps the solutions
        // and skips most seeds. The irregular sphere seeding gives no such
        // guarantee; skip there.
        std::vector<double> coarse(seeds.size());
        auto sample = [&](int i) { coarse[i] = norm_inf(shoot_residual(seeds[i])); };
        if (parallel)
            parallel_for(static_cast<int>(seeds.size()), [&](int i) { sample(i); });
        else
            for (size_t i = 0; i < seeds.size(); i++) sample(static_cast<int>(i));
        double radius = 1.15 / t.seed_grid;
        const size_t G = grid.size();
        for (size_t i = 0; i < seeds.size(); i++) {
            bool minimal = true;
            const size_t fam = i / G;
            for (size_t j = fam * G; j < (fam + 1) * G && minimal; j++) {
                if (j == i || m.dist(grid[i % G], grid[j % G]) > radius) continue;
                if (coarse[j] < coarse[i] || (coarse[j] == coarse[i] && j < i)) minimal = false;
            }
            if (minimal) picked.push_back(i);
        }
    } else {
        picked.resize(seeds.size());
        for (size_t i = 0; i < seeds.size(); i++) picked[i] = i;
    }
    std::vector<char> hit(picked.size(), 0);
    auto body = [&](size_t i) {
        if (polish(seeds[picked[i]])) hit[i] = 1;
    };
    if (parallel)
        parallel_for(picked.size(), [&](int i) { body(i); });
    else
        for (size_t i = 0; i < picked.size(); i++) body(i);
    std::vector<std::vector<P3>> out;
    for (size_t i = 0; i < picked.size(); i++)
        if (hit[i]) out.push_back(std::move(seeds[picked[i]]));
    return out;
}

SolveResult FlowProblem::solve(bool parallel) const {
    const Manifold& m = b_->manifold;
    const Tolerances& t = b_->tol;
    const int expdim = expected_dim();
    const int nvars = 2 * static_cast<int>(junctions_.size());

    auto vv_dist = [&](const std::vector<P3>& a, const std::vector<P3>& c) {
        double d = 0;
        for (size_t i = 0; i < a.size(); i++) d = std::max(d, m.dist(a[i], c[i]));
        return d;
    };

    std::vector<std::vector<P3>> cands = candidate_seeds(parallel);
    std::vector<GraphFlowSolution> kept;
    std::vector<std::vector<P3>> kept_vals;
    for (std::vector<P3>& cand : cands) {
        double rn = norm_inf(shoot_residual(cand));
        if (rn >= t.newton_tol) continue;
        std::map<std::string, std::string> limits;
        if (!classify_open_cells(cand, limits)) continue;
        bool dup = false;
        for (const auto& kv : kept_vals)
            if (vv_dist(kv, cand) < t.dedup_sol) dup = true;
        if (dup) continue;
        GraphFlowSolution sol;
        sol.x = m.canonicalize(basepoint_value(cand));
        sol.residual_norm = rn;
        for (size_t i = 0; i < junctions_.size(); i++)
            sol.junction_values[junctions_[i]] = m.canonicalize(cand[i]);
        sol.leaf_limits = std::move(limits);
        kept.push_back(std::move(sol));
        kept_vals.push_back(std::move(cand));
    }

    SolveResult res;
    res.flows = std::move(kept);
    if (res.flows.empty()) {
        res.status = "empty";
        return res;
    }
    if (expdim > 0) {
        res.status = "family";
        int rank = 0;
        for (size_t i = 0; i < kept_vals.size() && i < 3; i++)
            rank = std::max(rank, rank_at(kept_vals[i], 1e-3));
        res.family_dim = nvars - rank;
        return res;
    }
    if (expdim == 0 && res.flows.size() >= 8) {
        // a zero-dimensional problem should not produce a spray of
        // solutions; inspect the spread and the jacobian before calling
        // them isolated
        std::vector<size_t> spread;
        for (size_t i = 0; i < kept_vals.size(); i++) {
            bool close = false;
            for (size_t sp : spread)
                if (vv_dist(kept_vals[sp], kept_vals[i]) < 10 * t.dedup_sol) close = true;
            if (!close) spread.push_back(i);
        }
        if (spread.size() >= 8) {
            int rank = nvars;
            for (size_t i = 0; i < spread.size() && i < 3; i++)
                rank = std::min(rank, rank_at(kept_vals[spread[i]], 1e-3));
            if (rank < nvars) {
                res.status = "family";
                res.family_dim = nvars - rank;
                return res;
            }
        }
    }
    res.status = "isolated";
    return res;
}

GraphFlow propagate_tree_flow(const MetricStructure& s, const Backend& b, const P3& x) {
    FlowProblem fp(s, b, {});
    GraphFlow gf;
    auto values = fp.propagate(x);
    gf.x = values.at(s.graph.basepoint);
    for (const Edge& e : s.graph.edges) {
        const MorseBackend& mb = fp.backend_for(s.labels.at(e.id));
        gf.edge_paths[e.id] = integrate_trajectory(mb, values.at(e.src), s.length(e.id), true);
    }
    gf.vertex_values = std::move(values);
    gf.residual_norm = norm_inf(fp.cycle_residual_part(x));
    return gf;
}

std::vector<double> cycle_residual(const MetricStructure& s, const Backend& b, const P3& x) {
    return FlowProblem(s, b, {}).cycle_residual_part(x);
}

SolveResult solve_graph_flows(const MetricStructure& s, const Backend& b,
                              const std::vector<LeafConstraint>& constraints) {
    return FlowProblem(s, b, constraints).solve();
}

bool validate_graph_flow(const MetricStructure& s, const Backend& b, const GraphFlow& f,
                         double tol) {
    std::map<std::string, MorseBackend> backends;
    const Manifold& m = b.manifold;
    for (const Edge& e : s.graph.edges) {
        const std::string& key = s.labels.at(e.id);
        if (!backends.count(key)) backends.emplace(key, make_morse_backend(b, key));
        P3 flowed = flow_point(backends.at(key), f.vertex_values.at(e.src), s.length(e.id));
        if (m.dist(f.vertex_values.at(e.dst), flowed) > tol) return false;
    }
    return true;
}

}  // namespace graphflow
