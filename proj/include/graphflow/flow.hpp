#pragma once

#include "graphflow/metric.hpp"
#include "graphflow/morse.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace graphflow {

// spanning tree (greedy over lexicographically sorted edge ids) plus the
// b1 leftover cycle edges
struct CycleData {
    std::set<std::string> tree_edges;
    std::vector<std::string> cycle_edges;  // sorted
};

CycleData spanning_tree(const OrientedGraph& g);
// explicit tree choice; throws when the set is not a spanning tree
CycleData spanning_tree(const OrientedGraph& g, const std::set<std::string>& forced);

struct GraphFlow {
    P3 x{};  // basepoint value
    std::map<std::string, P3> vertex_values;
    std::map<std::string, Trajectory> edge_paths;
    double residual_norm = 0;
};

struct LeafConstraint {
    std::string leaf;  // leaf vertex id
    std::string crit;  // critical point id of the leaf edge's function
};

struct SolverConfig {
    std::vector<LeafConstraint> constraints;
    std::optional<int> seed_grid;
    std::optional<double> newton_tol;
    std::optional<int> newton_maxiter;
    std::optional<double> dedup_radius;

    void apply(Tolerances& t) const;
};

SolverConfig parse_solver_config(const std::string& text);
SolverConfig load_solver_config(const std::string& path);

struct GraphFlowSolution {
    P3 x{};  // value at the basepoint
    double residual_norm = 0;
    std::map<std::string, P3> junction_values;       // interior vertex -> value
    std::map<std::string, std::string> leaf_limits;  // leaf vertex -> critical id
};

struct SolveResult {
    std::string status;  // "isolated" | "family" | "empty"
    std::vector<GraphFlowSolution> flows;
    int family_dim = 0;

    int count() const { return static_cast<int>(flows.size()); }
    int count_mod2() const { return status == "isolated" ? count() % 2 : 0; }
};

// per-structure caches shared across many solves: compiled functions,
// critical point inventories, and the shot stable/unstable curves of the
// saddles (polylines through the saddle, both branches)
struct WCurve {
    std::vector<P3> pts;
};

struct StructureCache {
    std::map<std::string, MorseBackend> backends;                 // by catalog key
    std::map<std::string, std::vector<CriticalPoint>> crit_sets;  // by catalog key
    std::map<std::string, WCurve> curves;                         // "key|critid|u" or "...|s"
};

StructureCache build_structure_cache(const MetricStructure& s, const Backend& b);

// One constrained root-finding problem, solved by multiple shooting: the
// unknowns are chart values at every interior vertex, matched by two
// equations per interior edge, and the leaf constraints act at the vertex
// their edge meets. Leaf edges are never integrated while solving, only
// classified afterwards; flowing backwards through a long edge multiplies
// errors by e^(rate * length), which is why a single unknown at the
// basepoint does not work. Incoming leaves pin to unstable manifolds,
// outgoing to stable ones: full-dimensional cells contribute no equation
// (checked by limit classification afterwards), saddle cells one
// signed-distance equation against the shot curve, zero-cells a
// two-component chart pin.
class FlowProblem {
  public:
    FlowProblem(const MetricStructure& s, const Backend& b,
                const std::vector<LeafConstraint>& constraints,
                const StructureCache* cache = nullptr);

    void force_spanning_tree(const std::set<std::string>& edges);

    int dimension() const { return 2; }
    int equation_count() const;
    int expected_dim() const { return dimension() - equation_count(); }

    // tree propagation: values at every vertex (leaves sampled at the
    // nominal unit length)
    std::map<std::string, P3> propagate(const P3& x) const;
    std::vector<double> residual(const P3& x) const;
    std::vector<double> cycle_residual_part(const P3& x) const;

    SolveResult solve(bool parallel = true) const;

    // the shooting system itself: interior-edge matching equations in edge
    // id order, then constraint equations in leaf id order
    std::vector<double> shooting_residual(const std::map<std::string, P3>& values) const;
    const std::vector<std::string>& junctions() const { return junctions_; }

    // probe: numeric rank of the shooting Jacobian, either at explicit
    // junction values or at the tree propagation of a basepoint value
    int jacobian_rank(const std::map<std::string, P3>& values, double sv_rel_tol = 1e-3) const;
    int jacobian_rank(const P3& x, double sv_rel_tol = 1e-3) const;

    const CycleData& cycles() const { return cycles_; }
    const MetricStructure& structure() const { return *s_; }
    const std::vector<CriticalPoint>& critical_points(const std::string& key) const;
    const MorseBackend& backend_for(const std::string& key) const;
    const Tolerances& tol() const;

  private:
    struct Constraint {
        LeafConstraint lc;
        std::string attach;   // internal vertex the leaf edge meets
        std::string key;      // catalog key of the leaf edge
        bool incoming = true;
        const CriticalPoint* crit = nullptr;
        int equations = 0;    // 0 (open cell), 1 (curve), 2 (pin)
        const WCurve* curve = nullptr;
    };

    const MetricStructure* s_;
    const Backend* b_;
    std::unique_ptr<StructureCache> owned_cache_;
    const StructureCache* cache_;
    CycleData cycles_;
    std::vector<Constraint> cons_;
    // propagation plan: (edge id, forward?) in BFS order from the basepoint
    std::vector<std::pair<std::string, bool>> plan_;
    std::vector<std::string> junctions_;    // interior (non-leaf) vertices, sorted
    std::map<std::string, int> junction_id_;
    std::vector<std::string> inner_edges_;  // edges between interior vertices, sorted

    void build_plan();
    std::vector<double> shoot_residual(const std::vector<P3>& vals) const;
    std::vector<std::vector<double>> shoot_jacobian(const std::vector<P3>& vals) const;
    bool polish(std::vector<P3>& vals) const;
    int rank_at(const std::vector<P3>& vals, double sv_rel_tol) const;
    P3 basepoint_value(const std::vector<P3>& vals) const;
    // BFS cover of the interior by interior edges, starting from the roots
    std::vector<std::pair<std::string, bool>> inner_plan(std::vector<std::string> roots) const;
    std::vector<std::vector<P3>> candidate_seeds(bool parallel) const;
    bool classify_open_cells(const std::vector<P3>& vals,
                             std::map<std::string, std::string>& limits) const;
};

// convenience wrappers
GraphFlow propagate_tree_flow(const MetricStructure& s, const Backend& b, const P3& x);
std::vector<double> cycle_residual(const MetricStructure& s, const Backend& b, const P3& x);
SolveResult solve_graph_flows(const MetricStructure& s, const Backend& b,
                              const std::vector<LeafConstraint>& constraints);

// checks the vertex-agreement invariant of a realized flow
bool validate_graph_flow(const MetricStructure& s, const Backend& b, const GraphFlow& f,
                         double tol = 1e-6);

}  // namespace graphflow
