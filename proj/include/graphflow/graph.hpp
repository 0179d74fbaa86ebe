#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphflow {

// Errors carry a category so the CLI can map them to exit codes.
struct parse_error : std::runtime_error {
    int line = 0;
    parse_error(const std::string& msg, int ln) : std::runtime_error(msg), line(ln) {}
};

struct invariant_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Edge {
    std::string id;
    std::string src;
    std::string dst;
};

// Finite connected graph with oriented edges, a marked basepoint and
// in/out labelled univalent leaves. Edge ids are opaque strings ordered
// lexicographically wherever a canonical order is needed.
class OrientedGraph {
  public:
    std::vector<std::string> vertices;       // sorted, unique
    std::vector<Edge> edges;                 // sorted by id
    std::string basepoint;
    std::map<std::string, bool> leaves;      // leaf vertex -> true if incoming

    bool has_vertex(const std::string& v) const;
    const Edge* find_edge(const std::string& id) const;
    int valence(const std::string& v) const;
    bool is_leaf_vertex(const std::string& v) const { return leaves.count(v) > 0; }
    // leaf edges are the edges incident to a leaf vertex
    bool is_leaf_edge(const Edge& e) const;
    std::vector<std::string> incoming_leaves() const;  // sorted by vertex id
    std::vector<std::string> outgoing_leaves() const;
    // the unique edge at a leaf vertex
    const Edge& leaf_edge(const std::string& leaf_vertex) const;

    // throws invariant_error naming the first violated invariant
    void validate() const;
};

// chi = |V| - |E|, b1 = 1 - chi for connected graphs
struct BettiEuler {
    int b1;
    int chi;
};

OrientedGraph parse_graph(const std::string& text);
OrientedGraph load_graph(const std::string& path);
std::string format_graph(const OrientedGraph& g);

BettiEuler betti_and_euler(const OrientedGraph& g);

// Combinatorial map of graphs. Edges either map to an edge of the target
// or collapse to a vertex (nullopt). Morphisms own copies of both graphs
// so they stay valid independent of the originals.
struct GraphMorphism {
    OrientedGraph source;
    OrientedGraph target;
    std::map<std::string, std::string> vertex_map;
    std::map<std::string, std::optional<std::string>> edge_map;
};

// Empty result means the morphism satisfies all clauses:
// orientation preserved, basepoint preserved, vertex preimages are trees,
// open-edge preimages are single edges. Violations name the clause.
std::vector<std::string> validate_morphism(const GraphMorphism& m);

GraphMorphism identity_morphism(const OrientedGraph& g);
// composition g o f for f: A->B, g: B->C (checked for compatibility)
GraphMorphism compose(const GraphMorphism& first, const GraphMorphism& second);

struct AutomorphismGroup {
    std::vector<GraphMorphism> elements;  // identity first
    size_t order() const { return elements.size(); }
};

// All invertible self-maps: edge bijections preserving orientation,
// incidence, the basepoint and leaf in/out labels.
AutomorphismGroup compute_automorphisms(const OrientedGraph& g);

// Glue every outgoing leaf of g1 to a distinct incoming leaf of g2.
// matching: out-leaf vertex of g1 -> in-leaf vertex of g2, injective;
// unmatched in-leaves of g2 survive. Ids get prefixed "a."/"b." and each
// matched pair merges into one internal vertex (named after the g1 side).
OrientedGraph glue(const OrientedGraph& g1, const OrientedGraph& g2,
                   const std::map<std::string, std::string>& matching);

// Morphism inference used by the CLI for chain files: edges of `from`
// whose id exists in `to` map across, all others collapse; the vertex map
// follows shared ids and collapsed components. Throws domain_error when
// no consistent map exists.
GraphMorphism infer_collapse_morphism(const OrientedGraph& from, const OrientedGraph& to);

}  // namespace graphflow
