#include "graphflow/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

namespace graphflow {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

// connectivity over the undirected skeleton
bool connected(const OrientedGraph& g) {
    if (g.vertices.empty()) return false;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : g.edges) {
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
    }
    std::set<std::string> seen;
    std::queue<std::string> q;
    q.push(g.vertices.front());
    seen.insert(g.vertices.front());
    while (!q.empty()) {
        auto v = q.front();
        q.pop();
        for (const auto& w : adj[v])
            if (seen.insert(w).second) q.push(w);
    }
    return seen.size() == g.vertices.size();
}

}  // namespace

bool OrientedGraph::has_vertex(const std::string& v) const {
    return std::binary_search(vertices.begin(), vertices.end(), v);
}

const Edge* OrientedGraph::find_edge(const std::string& id) const {
    auto it = std::lower_bound(edges.begin(), edges.end(), id,
                               [](const Edge& e, const std::string& s) { return e.id < s; });
    if (it != edges.end() && it->id == id) return &*it;
    return nullptr;
}

int OrientedGraph::valence(const std::string& v) const {
    int n = 0;
    for (const auto& e : edges) {
        if (e.src == v) n++;
        if (e.dst == v) n++;  // a loop counts twice
    }
    return n;
}

bool OrientedGraph::is_leaf_edge(const Edge& e) const {
    return is_leaf_vertex(e.src) || is_leaf_vertex(e.dst);
}

std::vector<std::string> OrientedGraph::incoming_leaves() const {
    std::vector<std::string> out;
    for (const auto& [v, in] : leaves)
        if (in) out.push_back(v);
    return out;
}

std::vector<std::string> OrientedGraph::outgoing_leaves() const {
    std::vector<std::string> out;
    for (const auto& [v, in] : leaves)
        if (!in) out.push_back(v);
    return out;
}

const Edge& OrientedGraph::leaf_edge(const std::string& leaf_vertex) const {
    for (const auto& e : edges)
        if (e.src == leaf_vertex || e.dst == leaf_vertex) return e;
    throw domain_error("leaf vertex has no edge: " + leaf_vertex);
}

void OrientedGraph::validate() const {
    if (vertices.empty()) throw invariant_error("empty graph");
    std::set<std::string> vset(vertices.begin(), vertices.end());
    if (vset.size() != vertices.size()) throw invariant_error("duplicate vertex id");
    std::set<std::string> eset;
    for (const auto& e : edges) {
        if (!eset.insert(e.id).second) throw invariant_error("duplicate edge id: " + e.id);
        if (!vset.count(e.src) || !vset.count(e.dst))
            throw invariant_error("edge endpoint not declared: " + e.id);
    }
    for (const auto& [v, in] : leaves) {
        (void)in;
        if (!vset.count(v)) throw invariant_error("leaf on unknown vertex: " + v);
        if (valence(v) != 1) throw invariant_error("leaf vertex not univalent: " + v);
    }
    if (basepoint.empty()) throw invariant_error("no valid basepoint");
    if (!vset.count(basepoint)) throw invariant_error("basepoint on unknown vertex");
    if (valence(basepoint) < 2) throw invariant_error("basepoint is univalent");
    if (leaves.count(basepoint)) throw invariant_error("basepoint is a leaf");
    // leaf edge orientation: incoming leaves feed the graph, outgoing drain it
    for (const auto& [v, in] : leaves) {
        const Edge& e = leaf_edge(v);
        if (in && e.src != v)
            throw invariant_error("incoming leaf edge must be oriented away from the leaf: " + v);
        if (!in && e.dst != v)
            throw invariant_error("outgoing leaf edge must be oriented toward the leaf: " + v);
    }
    if (!connected(*this)) throw invariant_error("disconnected graph");
}

OrientedGraph parse_graph(const std::string& text) {
    OrientedGraph g;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int basepoint_lines = 0;
    std::set<std::string> vset, eset;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& kw = toks[0];
        if (kw == "vertex") {
            if (toks.size() < 2 || toks.size() > 3)
                throw parse_error("vertex line wants: vertex <id> [basepoint]", lineno);
            if (!vset.insert(toks[1]).second)
                throw parse_error("duplicate vertex id: " + toks[1], lineno);
            g.vertices.push_back(toks[1]);
            if (toks.size() == 3) {
                if (toks[2] != "basepoint")
                    throw parse_error("unknown vertex flag: " + toks[2], lineno);
                basepoint_lines++;
                g.basepoint = toks[1];
            }
        } else if (kw == "edge") {
            if (toks.size() != 4)
                throw parse_error("edge line wants: edge <id> <src> <dst>", lineno);
            if (!eset.insert(toks[1]).second)
                throw parse_error("duplicate edge id: " + toks[1], lineno);
            g.edges.push_back({toks[1], toks[2], toks[3]});
        } else if (kw == "leaf") {
            if (toks.size() != 3 || (toks[2] != "in" && toks[2] != "out"))
                throw parse_error("leaf line wants: leaf <vertex-id> in|out", lineno);
            if (g.leaves.count(toks[1]))
                throw parse_error("duplicate leaf declaration: " + toks[1], lineno);
            g.leaves[toks[1]] = (toks[2] == "in");
        } else if (kw == "cyclic" || kw == "mark" || kw == "length" || kw == "label") {
            // extensions handled by the fat-graph / metric parsers
            continue;
        } else {
            throw parse_error("unknown directive: " + kw, lineno);
        }
    }
    if (basepoint_lines > 1) throw invariant_error("multiple basepoints");
    std::sort(g.vertices.begin(), g.vertices.end());
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });
    // endpoint references checked before the heavier invariants
    for (const auto& e : g.edges)
        if (!vset.count(e.src) || !vset.count(e.dst))
            throw invariant_error("edge endpoint not declared: " + e.id);
    g.validate();
    return g;
}

OrientedGraph load_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_graph(ss.str());
}

std::string format_graph(const OrientedGraph& g) {
    std::ostringstream out;
    for (const auto& v : g.vertices) {
        out << "vertex " << v;
        if (v == g.basepoint) out << " basepoint";
        out << "\n";
    }
    for (const auto& e : g.edges) out << "edge " << e.id << " " << e.src << " " << e.dst << "\n";
    for (const auto& [v, in] : g.leaves) out << "leaf " << v << " " << (in ? "in" : "out") << "\n";
    return out.str();
}

BettiEuler betti_and_euler(const OrientedGraph& g) {
    int chi = static_cast<int>(g.vertices.size()) - static_cast<int>(g.edges.size());
    return {1 - chi, chi};
}

// ---- morphisms ----

std::vector<std::string> validate_morphism(const GraphMorphism& m) {
    std::vector<std::string> bad;
    // structural totality first; later clauses assume it
    for (const auto& v : m.source.vertices) {
        auto it = m.vertex_map.find(v);
        if (it == m.vertex_map.end() || !m.target.has_vertex(it->second)) {
            bad.push_back("vertex map not total: " + v);
            return bad;
        }
    }
    for (const auto& e : m.source.edges) {
        auto it = m.edge_map.find(e.id);
        if (it == m.edge_map.end()) {
            bad.push_back("edge map not total: " + e.id);
            return bad;
        }
        if (it->second && !m.target.find_edge(*it->second)) {
            bad.push_back("edge maps to unknown edge: " + e.id);
            return bad;
        }
    }
    for (const auto& e : m.source.edges) {
        const auto& img = m.edge_map.at(e.id);
        const auto& sv = m.vertex_map.at(e.src);
        const auto& dv = m.vertex_map.at(e.dst);
        if (img) {
            const Edge* te = m.target.find_edge(*img);
            if (te->src != sv || te->dst != dv)
                bad.push_back("orientation not preserved on edge " + e.id);
        } else if (sv != dv) {
            bad.push_back("collapsed edge endpoints split: " + e.id);
        }
    }
    if (m.vertex_map.at(m.source.basepoint) != m.target.basepoint)
        bad.push_back("basepoint not preserved");
    // preimage of each vertex must be a nonempty tree
    for (const auto& w : m.target.vertices) {
        std::vector<std::string> pre;
        for (const auto& v : m.source.vertices)
            if (m.vertex_map.at(v) == w) pre.push_back(v);
        if (pre.empty()) {
            bad.push_back("vertex preimage empty: " + w);
            continue;
        }
        int collapsed = 0;
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& e : m.source.edges)
            if (!m.edge_map.at(e.id) && m.vertex_map.at(e.src) == w) {
                collapsed++;
                adj[e.src].push_back(e.dst);
                adj[e.dst].push_back(e.src);
            }
        std::set<std::string> seen;
        std::queue<std::string> q;
        q.push(pre.front());
        seen.insert(pre.front());
        while (!q.empty()) {
            auto v = q.front();
            q.pop();
            for (const auto& u : adj[v])
                if (seen.insert(u).second) q.push(u);
        }
        if (seen.size() != pre.size())
            bad.push_back("vertex preimage not connected: " + w);
        else if (collapsed != static_cast<int>(pre.size()) - 1)
            bad.push_back("vertex preimage has a cycle: " + w);
    }
    for (const auto& te : m.target.edges) {
        int hits = 0;
        for (const auto& e : m.source.edges) {
            const auto& img = m.edge_map.at(e.id);
            if (img && *img == te.id) hits++;
        }
        if (hits != 1) bad.push_back("edge preimage not a single edge: " + te.id);
    }
    return bad;
}

GraphMorphism identity_morphism(const OrientedGraph& g) {
    GraphMorphism m;
    m.source = g;
    m.target = g;
    for (const auto& v : g.vertices) m.vertex_map[v] = v;
    for (const auto& e : g.edges) m.edge_map[e.id] = e.id;
    return m;
}

static bool same_graph(const OrientedGraph& a, const OrientedGraph& b) {
    if (a.vertices != b.vertices || a.basepoint != b.basepoint || a.leaves != b.leaves) return false;
    if (a.edges.size() != b.edges.size()) return false;
    for (size_t i = 0; i < a.edges.size(); i++) {
        if (a.edges[i].id != b.edges[i].id || a.edges[i].src != b.edges[i].src ||
            a.edges[i].dst != b.edges[i].dst)
            return false;
    }
    return true;
}

GraphMorphism compose(const GraphMorphism& first, const GraphMorphism& second) {
    if (!same_graph(first.target, second.source))
        throw domain_error("morphisms not composable");
    GraphMorphism m;
    m.source = first.source;
    m.target = second.target;
    for (const auto& [v, w] : first.vertex_map) m.vertex_map[v] = second.vertex_map.at(w);
    for (const auto& [e, img] : first.edge_map) {
        if (!img)
            m.edge_map[e] = std::nullopt;
        else
            m.edge_map[e] = second.edge_map.at(*img);
    }
    return m;
}

// ---- automorphisms ----

namespace {

struct AutSearch {
    const OrientedGraph& g;
    std::map<std::string, std::string> emap;   // edge -> edge
    std::map<std::string, std::string> vmap;   // vertex -> vertex
    std::map<std::string, std::string> vinv;
    std::set<std::string> used_edges;
    std::vector<std::map<std::string, std::string>> found;  // edge maps

    explicit AutSearch(const OrientedGraph& gr) : g(gr) {}

    bool bind_vertex(const std::string& v, const std::string& w,
                     std::vector<std::string>& trail) {
        auto it = vmap.find(v);
        if (it != vmap.end()) return it->second == w;
        auto inv = vinv.find(w);
        if (inv != vinv.end()) return false;
        // leaf labels and the basepoint must survive
        if ((v == g.basepoint) != (w == g.basepoint)) return false;
        auto lv = g.leaves.find(v);
        auto lw = g.leaves.find(w);
        if ((lv == g.leaves.end()) != (lw == g.leaves.end())) return false;
        if (lv != g.leaves.end() && lv->second != lw->second) return false;
        if (g.valence(v) != g.valence(w)) return false;
        vmap[v] = w;
        vinv[w] = v;
        trail.push_back(v);
        return true;
    }

    void unbind(const std::vector<std::string>& trail) {
        for (const auto& v : trail) {
            vinv.erase(vmap[v]);
            vmap.erase(v);
        }
    }

    void run(size_t idx) {
        if (idx == g.edges.size()) {
            found.push_back(emap);
            return;
        }
        const Edge& e = g.edges[idx];
        for (const Edge& cand : g.edges) {
            if (used_edges.count(cand.id)) continue;
            std::vector<std::string> trail;
            if (bind_vertex(e.src, cand.src, trail) && bind_vertex(e.dst, cand.dst, trail)) {
                emap[e.id] = cand.id;
                used_edges.insert(cand.id);
                run(idx + 1);
                used_edges.erase(cand.id);
                emap.erase(e.id);
            }
            unbind(trail);
        }
    }
};

}  // namespace

AutomorphismGroup compute_automorphisms(const OrientedGraph& g) {
    AutSearch search(g);
    search.run(0);
    AutomorphismGroup grp;
    for (const auto& emap : search.found) {
        GraphMorphism m;
        m.source = g;
        m.target = g;
        // rebuild the vertex map from the edge map
        for (const auto& [eid, fid] : emap) {
            const Edge* e = g.find_edge(eid);
            const Edge* f = g.find_edge(fid);
            m.vertex_map[e->src] = f->src;
            m.vertex_map[e->dst] = f->dst;
        }
        for (const auto& [eid, fid] : emap) m.edge_map[eid] = fid;
        grp.elements.push_back(std::move(m));
    }
    // identity first, then lexicographic by edge images
    std::sort(grp.elements.begin(), grp.elements.end(),
              [](const GraphMorphism& a, const GraphMorphism& b) {
                  return a.edge_map < b.edge_map;
              });
    return grp;
}

OrientedGraph glue(const OrientedGraph& g1, const OrientedGraph& g2,
                   const std::map<std::string, std::string>& matching) {
    auto outs = g1.outgoing_leaves();
    if (outs.empty()) throw domain_error("arity mismatch: g1 has no outgoing leaves");
    if (matching.size() != outs.size())
        throw domain_error("arity mismatch: every outgoing leaf of g1 must be matched");
    std::set<std::string> targets;
    for (const auto& [o, i] : matching) {
        if (!g1.leaves.count(o) || g1.leaves.at(o))
            throw domain_error("matching key is not an outgoing leaf of g1: " + o);
        if (!g2.leaves.count(i) || !g2.leaves.at(i))
            throw domain_error("matching value is not an incoming leaf of g2: " + i);
        if (!targets.insert(i).second)
            throw domain_error("matching not injective at " + i);
    }
    OrientedGraph out;
    auto a = [](const std::string& s) { return "a." + s; };
    auto b = [](const std::string& s) { return "b." + s; };
    // matched in-leaf vertices of g2 are identified with their g1 partners
    std::map<std::string, std::string> b_rename;
    for (const auto& [o, i] : matching) b_rename[i] = a(o);
    for (const auto& v : g1.vertices) out.vertices.push_back(a(v));
    for (const auto& v : g2.vertices)
        if (!b_rename.count(v)) out.vertices.push_back(b(v));
    for (const auto& e : g1.edges) out.edges.push_back({a(e.id), a(e.src), a(e.dst)});
    for (const auto& e : g2.edges) {
        auto rn = [&](const std::string& v) {
            auto it = b_rename.find(v);
            return it != b_rename.end() ? it->second : b(v);
        };
        out.edges.push_back({b(e.id), rn(e.src), rn(e.dst)});
    }
    for (const auto& [v, in] : g1.leaves)
        if (in) out.leaves[a(v)] = true;
    for (const auto& [v, in] : g2.leaves) {
        if (in && b_rename.count(v)) continue;  // glued away
        out.leaves[b(v)] = in;
    }
    out.basepoint = a(g1.basepoint);
    std::sort(out.vertices.begin(), out.vertices.end());
    std::sort(out.edges.begin(), out.edges.end(),
              [](const Edge& x, const Edge& y) { return x.id < y.id; });
    out.validate();
    return out;
}

GraphMorphism infer_collapse_morphism(const OrientedGraph& from, const OrientedGraph& to) {
    GraphMorphism m;
    m.source = from;
    m.target = to;
    for (const auto& e : from.edges)
        m.edge_map[e.id] = to.find_edge(e.id) ? std::optional<std::string>(e.id) : std::nullopt;
    // seed the vertex map from shared ids and surviving edge endpoints
    std::map<std::string, std::string> vm;
    for (const auto& v : from.vertices)
        if (to.has_vertex(v)) vm[v] = v;
    for (const auto& e : from.edges) {
        if (!m.edge_map[e.id]) continue;
        const Edge* te = to.find_edge(e.id);
        auto put = [&](const std::string& v, const std::string& w) {
            auto it = vm.find(v);
            if (it != vm.end() && it->second != w)
                throw domain_error("inconsistent vertex image for " + v);
            vm[v] = w;
        };
        put(e.src, te->src);
        put(e.dst, te->dst);
    }
    // propagate across collapsed edges
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& e : from.edges) {
            if (m.edge_map[e.id]) continue;
            auto is = vm.find(e.src);
            auto id = vm.find(e.dst);
            if (is != vm.end() && id == vm.end()) {
                vm[e.dst] = is->second;
                changed = true;
            } else if (id != vm.end() && is == vm.end()) {
                vm[e.src] = id->second;
                changed = true;
            }
        }
    }
    for (const auto& v : from.vertices)
        if (!vm.count(v)) throw domain_error("cannot infer image of vertex " + v);
    m.vertex_map = vm;
    auto bad = validate_morphism(m);
    if (!bad.empty()) throw domain_error("inferred map is not a morphism: " + bad.front());
    return m;
}

}  // namespace graphflow
