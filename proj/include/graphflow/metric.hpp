#pragma once

#include "graphflow/graph.hpp"

#include <functional>

namespace graphflow {

// Graph with edge lengths and function labels. Leaf edges are treated as
// half-infinite by the solver; their stored length only sets how far
// trajectories get sampled for propagation and plotting.
struct MetricStructure {
    OrientedGraph graph;
    std::map<std::string, double> lengths;
    std::map<std::string, std::string> labels;  // edge -> catalog key

    bool half_infinite(const std::string& edge_id) const {
        const Edge* e = graph.find_edge(edge_id);
        return e && graph.is_leaf_edge(*e);
    }
    double length(const std::string& edge_id) const;

    // positive lengths on internal edges; labels, when present on edges
    // sharing a vertex, must name distinct functions. A bivalent vertex
    // with one edge in and one out may repeat a label (serial
    // continuation, the glued-leaf case).
    void validate(const std::function<bool(const std::string&, const std::string&)>&
                      same_function = {}) const;
};

MetricStructure parse_structure(const std::string& text);
MetricStructure load_structure(const std::string& path);
std::string format_structure(const MetricStructure& ms);

// Point of the simplex attached to a composable chain of collapses
// G_k -> G_{k-1} -> ... -> G_0. chain[j] maps G_{k-j} onto G_{k-j-1};
// the metric lives on the deepest graph G_k (= `graph`, also
// chain.front().source when the chain is nonempty).
struct SimplexPoint {
    OrientedGraph graph;
    std::vector<double> t;             // barycentric weights, size chain.size()+1
    std::vector<GraphMorphism> chain;

    void validate() const;
};

struct SimplexMetricResult {
    MetricStructure metric;
    std::vector<std::string> zero_edges;  // collapsed at every positive level
};

// length(E) = sum of t_i over the levels where E has not yet collapsed
SimplexMetricResult simplex_metric(const SimplexPoint& p);

// Install labels after checking every key is known and adjacent edges get
// distinct functions (same serial-bivalent exemption as validate()).
void assign_labels(MetricStructure& ms, const std::map<std::string, std::string>& assignment,
                   const std::set<std::string>& known_keys,
                   const std::function<bool(const std::string&, const std::string&)>&
                       same_function = {});

}  // namespace graphflow
