#include "graphflow/fat_graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace graphflow {

std::string to_string(const OrientedEdge& o) {
    return o.forward ? o.edge : "~" + o.edge;
}

namespace {

std::vector<HalfEdge> incident_half_edges(const OrientedGraph& g, const std::string& v) {
    std::vector<HalfEdge> out;
    for (const auto& e : g.edges) {
        if (e.src == v) out.push_back({e.id, true});
        if (e.dst == v) out.push_back({e.id, false});
    }
    return out;
}

HalfEdge parse_half_edge_token(const std::string& tok, int lineno) {
    if (tok.size() < 2 || (tok.back() != '+' && tok.back() != '-'))
        throw parse_error("half-edge token wants <edge-id>+ or <edge-id>-: " + tok, lineno);
    return {tok.substr(0, tok.size() - 1), tok.back() == '+'};
}

}  // namespace

void FatGraph::validate(bool strict) const {
    graph.validate();
    // every half-edge in exactly one cyclic order, and at the right vertex
    std::set<std::pair<std::string, bool>> seen;
    for (const auto& [v, order] : cyclic) {
        if (!graph.has_vertex(v)) throw invariant_error("cyclic order on unknown vertex: " + v);
        for (const auto& h : order) {
            const Edge* e = graph.find_edge(h.edge);
            if (!e) throw invariant_error("cyclic order names unknown edge: " + h.edge);
            const std::string& at = h.at_src ? e->src : e->dst;
            if (at != v)
                throw invariant_error("half-edge " + h.edge + (h.at_src ? "+" : "-") +
                                      " not incident at " + v);
            if (!seen.insert({h.edge, h.at_src}).second)
                throw invariant_error("half-edge repeated: " + h.edge + (h.at_src ? "+" : "-"));
        }
    }
    if (seen.size() != 2 * graph.edges.size())
        throw invariant_error("cyclic orders do not cover all half-edges");
    for (const auto& v : graph.vertices) {
        int val = graph.valence(v);
        if (strict && !graph.is_leaf_vertex(v) && val < 3)
            throw invariant_error("vertex below trivalent: " + v);
    }
}

FatGraph parse_fat_graph(const std::string& text) {
    FatGraph fg;
    fg.graph = parse_graph(text);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string kw;
        if (!(ss >> kw)) continue;
        if (kw == "cyclic") {
            std::string v;
            if (!(ss >> v)) throw parse_error("cyclic line wants a vertex id", lineno);
            if (fg.cyclic.count(v)) throw parse_error("duplicate cyclic line for " + v, lineno);
            std::vector<HalfEdge> order;
            std::string tok;
            while (ss >> tok) order.push_back(parse_half_edge_token(tok, lineno));
            if (order.empty()) throw parse_error("empty cyclic order for " + v, lineno);
            fg.cyclic[v] = std::move(order);
        } else if (kw == "mark") {
            int idx;
            std::string side;
            if (!(ss >> idx >> side) || (side != "in" && side != "out"))
                throw parse_error("mark line wants: mark <cycle-index> in|out", lineno);
            fg.marks[idx] = (side == "in");
        }
    }
    // valence <= 2 vertices have a unique cyclic order; fill it in
    for (const auto& v : fg.graph.vertices) {
        if (fg.cyclic.count(v)) continue;
        auto inc = incident_half_edges(fg.graph, v);
        if (inc.size() > 2)
            throw invariant_error("vertex needs an explicit cyclic order: " + v);
        fg.cyclic[v] = inc;
    }
    fg.validate();
    return fg;
}

FatGraph load_fat_graph(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_fat_graph(ss.str());
}

int BoundaryCyclePartition::cycle_of(const OrientedEdge& o) const {
    for (size_t i = 0; i < cycles.size(); i++)
        for (const auto& e : cycles[i])
            if (e == o) return static_cast<int>(i);
    return -1;
}

BoundaryCyclePartition boundary_cycles(const FatGraph& fg) {
    const OrientedGraph& g = fg.graph;
    // successor in the cyclic order, keyed by half-edge
    std::map<HalfEdge, HalfEdge> succ;
    for (const auto& [v, order] : fg.cyclic) {
        (void)v;
        for (size_t i = 0; i < order.size(); i++)
            succ[order[i]] = order[(i + 1) % order.size()];
    }
    auto step = [&](const OrientedEdge& o) -> OrientedEdge {
        // arrive at the head of o; the reversal of o emanates there
        HalfEdge arrival{o.edge, !o.forward};
        HalfEdge next = succ.at(arrival);
        return {next.edge, next.at_src};
    };
    std::set<OrientedEdge> todo;
    for (const auto& e : g.edges) {
        todo.insert({e.id, true});
        todo.insert({e.id, false});
    }
    BoundaryCyclePartition part;
    while (!todo.empty()) {
        OrientedEdge start = *todo.begin();  // least unused oriented edge
        std::vector<OrientedEdge> cycle;
        OrientedEdge cur = start;
        do {
            cycle.push_back(cur);
            todo.erase(cur);
            cur = step(cur);
        } while (!(cur == start));
        part.cycles.push_back(std::move(cycle));
    }
    // canonical: rotate each cycle to its least entry, sort cycles by first entry
    for (auto& c : part.cycles) {
        auto least = std::min_element(c.begin(), c.end());
        std::rotate(c.begin(), least, c.end());
    }
    std::sort(part.cycles.begin(), part.cycles.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return part;
}

SurfaceInvariants surface_invariants(const FatGraph& fg) {
    auto part = boundary_cycles(fg);
    int chi = static_cast<int>(fg.graph.vertices.size()) -
              static_cast<int>(fg.graph.edges.size());
    int n = static_cast<int>(part.cycles.size());
    int twice_genus = 2 - chi - n;
    if (twice_genus % 2 != 0 || twice_genus < 0)
        throw invariant_error("non-integral genus from chi=" + std::to_string(chi) +
                              " n=" + std::to_string(n));
    return {chi, n, twice_genus / 2};
}

ChordDiagramReport is_chord_diagram(const FatGraph& fg) {
    auto part = boundary_cycles(fg);
    for (size_t i = 0; i < part.cycles.size(); i++)
        if (!fg.marks.count(static_cast<int>(i)))
            throw domain_error("unmarked cycle " + std::to_string(i));
    ChordDiagramReport rep;
    rep.ok = true;
    for (const auto& e : fg.graph.edges) {
        bool fwd_in = fg.marks.at(part.cycle_of({e.id, true}));
        bool rev_in = fg.marks.at(part.cycle_of({e.id, false}));
        if (fwd_in == rev_in) {
            rep.ok = false;
            rep.violations.push_back(e.id);
        }
    }
    return rep;
}

CylinderComplex build_mapping_cylinder(const FatGraph& fg,
                                       const std::map<std::string, double>& lengths) {
    auto part = boundary_cycles(fg);
    for (const auto& e : fg.graph.edges) {
        auto it = lengths.find(e.id);
        if (it == lengths.end()) throw domain_error("missing length for edge " + e.id);
        if (!(it->second > 0)) throw domain_error("nonpositive length on edge " + e.id);
    }
    for (size_t i = 0; i < part.cycles.size(); i++)
        if (!fg.marks.count(static_cast<int>(i)))
            throw domain_error("unmarked cycle " + std::to_string(i));
    CylinderComplex cx;
    for (size_t i = 0; i < part.cycles.size(); i++) {
        Cylinder cyl;
        cyl.incoming = fg.marks.at(static_cast<int>(i));
        double at = 0;
        for (const auto& o : part.cycles[i]) {
            double len = lengths.at(o.edge);
            cyl.word.push_back({o, at, at + len});
            at += len;
        }
        cyl.circumference = at;
        cx.cylinders.push_back(std::move(cyl));
    }
    return cx;
}

}  // namespace graphflow
