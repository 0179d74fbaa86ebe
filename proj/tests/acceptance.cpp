// Acceptance gate. Runs the numbered end-to-end criteria and prints one
// [PASS]/[FAIL] line each, with wall time against a pinned budget. Pass
// criterion numbers as arguments to run a subset. Exit code 0 only when
// every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graphflow/fat_graph.hpp"
#include "graphflow/operations.hpp"

#include "oracles.hpp"
#include "ring_check.hpp"
#include "support.hpp"

namespace acc {

using namespace graphflow;
using support::fx;

constexpr unsigned kSeed = 20260816;
constexpr double kDerivTol = 1e-6;  // criterion 4: worst relative stencil error
constexpr double kPropTol = 1e-6;   // criterion 5: propagation vs closed form
constexpr double kMatchTol = 1e-6;  // solution set matching distance

// 1: boundary cycle words and surface invariants -------------------------

std::vector<std::string> cycle_words(const BoundaryCyclePartition& p) {
    std::vector<std::string> out;
    for (const auto& cyc : p.cycles) {
        std::string w;
        for (const OrientedEdge& o : cyc) {
            if (!w.empty()) w += " ";
            w += to_string(o);
        }
        out.push_back(w);
    }
    return out;
}

bool criterion1(std::ostream& log) {
    bool ok = true;
    auto words = cycle_words(boundary_cycles(load_fat_graph(fx("gamma2.graph"))));
    std::vector<std::string> want{"A B C", "~A ~D E ~B D ~C ~E"};
    if (words != want) {
        ok = false;
        log << "unexpected boundary words:";
        for (const auto& w : words) log << " [" << w << "]";
        log << "\n";
    }
    struct Row {
        const char* file;
        int genus;
        int boundary;
    };
    for (const Row& r : {Row{"gamma1.graph", 0, 4}, Row{"gamma2.graph", 1, 2},
                         Row{"fig8.graph", 0, 3}}) {
        SurfaceInvariants inv = surface_invariants(load_fat_graph(fx(r.file)));
        if (inv.genus != r.genus || inv.boundary != r.boundary) {
            ok = false;
            log << r.file << ": genus " << inv.genus << " boundary " << inv.boundary
                << ", want " << r.genus << "/" << r.boundary << "\n";
        }
    }
    return ok;
}

// 2: random fat graph boundary laws ---------------------------------------

bool criterion2(std::ostream& log) {
    std::mt19937 rng(kSeed);
    for (int i = 0; i < 520; i++) {
        FatGraph fg = support::random_fat_graph(rng);
        std::string bad = support::fat_graph_law_violation(fg);
        if (!bad.empty()) {
            log << "graph " << i << ": " << bad << "\n";
            return false;
        }
    }
    return true;
}

// 3: critical inventories, homology ranks, boundary squared ---------------

bool dd_zero(const MorseComplex& mc) {
    auto cnt = [&](const std::string& a, const std::string& b) {
        auto it = mc.counts.find({a, b});
        return it == mc.counts.end() ? 0 : it->second;
    };
    for (const CriticalPoint* top : mc.grade(2))
        for (const CriticalPoint* bot : mc.grade(0)) {
            int s = 0;
            for (const CriticalPoint* mid : mc.grade(1))
                s += cnt(top->id, mid->id) * cnt(mid->id, bot->id);
            if (s % 2 != 0) return false;
        }
    return true;
}

bool criterion3(std::ostream& log) {
    const std::map<ManifoldKind, std::vector<int>> want_ranks{
        {ManifoldKind::torus, {1, 2, 1}},
        {ManifoldKind::sphere, {1, 0, 1}},
        {ManifoldKind::rp2, {1, 1, 1}}};
    bool ok = true;
    for (const auto& [kind, want] : want_ranks) {
        Backend b = default_backend(kind);
        int chi = manifold_euler_characteristic(kind);
        for (const std::string& key : b.keys()) {
            MorseComplex mc = morse_complex(make_morse_backend(b, key));
            std::vector<int> ranks = homology_ranks(mc);
            if (ranks != want) {
                ok = false;
                log << key << ": ranks";
                for (int r : ranks) log << " " << r;
                log << "\n";
            }
            int alt = 0;
            for (const CriticalPoint& p : mc.points) alt += p.index % 2 == 0 ? 1 : -1;
            if (alt != chi) {
                ok = false;
                log << key << ": alternating count " << alt << " vs chi " << chi << "\n";
            }
            if (!dd_zero(mc)) {
                ok = false;
                log << key << ": boundary composed with itself is nonzero\n";
            }
        }
    }
    return ok;
}

// 4: finite-difference derivative agreement -------------------------------

bool criterion4(std::ostream& log) {
    std::mt19937 rng(kSeed);
    double worst = 0;
    std::string worst_key;
    for (ManifoldKind kind : {ManifoldKind::torus, ManifoldKind::sphere, ManifoldKind::rp2}) {
        Backend b = default_backend(kind);
        for (const std::string& key : b.keys()) {
            CompiledFunction fn = compile(b.manifold, b.spec(key));
            for (int i = 0; i < 1000; i++) {
                P3 p = b.manifold.random_point(rng);
                double e = support::derivative_error(b.manifold, fn, p);
                if (e > worst) {
                    worst = e;
                    worst_key = key;
                }
            }
        }
    }
    log << "worst relative error " << worst << " (" << worst_key << ")\n";
    return worst <= kDerivTol;
}

// 5: tree propagation against the separable flow --------------------------

std::array<double, 4> cos2_params(const Backend& b, const std::string& key) {
    const auto& p = b.spec(key).params;
    return {p.at("ax"), p.at("ay"), p.at("px"), p.at("py")};
}

bool criterion5(std::ostream& log) {
    Backend b = default_backend(ManifoldKind::torus);
    MetricStructure s = load_structure(fx("y_prod.structure"));
    auto pa = cos2_params(b, "cos2.a");
    auto pb = cos2_params(b, "cos2.b");
    auto pc = cos2_params(b, "cos2.c");
    const Manifold& m = b.manifold;
    double worst = 0;
    for (int gx = 0; gx < 10; gx++)
        for (int gy = 0; gy < 10; gy++) {
            P3 x = m.project({(gx + 0.5) / 10.0, (gy + 0.5) / 10.0, 0});
            GraphFlow f = propagate_tree_flow(s, b, x);
            auto expect = [&](const char* vertex, const std::array<double, 4>& prm, double t) {
                auto w = oracle::flow_torus(prm[0], prm[1], prm[2], prm[3], {x[0], x[1]}, t);
                worst = std::max(worst, m.dist(f.vertex_values.at(vertex), {w[0], w[1], 0}));
            };
            worst = std::max(worst, m.dist(f.vertex_values.at("c"), x));
            expect("l1", pa, -1.0);  // incoming leaves sample one unit upstream
            expect("l2", pb, -1.0);
            expect("o", pc, 1.0);
            if (!cycle_residual(s, b, x).empty()) {
                log << "nonempty cycle residual on a tree\n";
                return false;
            }
        }
    log << "worst propagation distance " << worst << "\n";
    return worst <= kPropTol;
}

// 6: product table against the intersection ring --------------------------

bool criterion6(std::ostream& log) {
    MetricStructure s = load_structure(fx("y_prod.structure"));
    Backend base = default_backend(ManifoldKind::torus);
    OperationTable t = build_operation_table(s, base);
    bool ok = true;
    if (t.partial || t.entries.size() != 15) {
        ok = false;
        log << "expected 15 complete entries, got " << t.entries.size()
            << (t.partial ? " (partial)" : "") << "\n";
    }
    for (const auto& [tuple, e] : t.entries)
        if (e.expdim != 0) {
            ok = false;
            log << "tabulated tuple with expdim " << e.expdim << "\n";
        }
    if (ringcheck::table_ring_mismatches(s, base, t, &log) != 0) ok = false;

    // the marquee products: transverse circles meet once, like circles miss
    auto types = ringcheck::classify_bases(s, base, t);
    std::string a_h = types.at("l1").at("i1.0") == "H" ? "i1.0" : "i1.1";
    std::string a_v = a_h == "i1.0" ? "i1.1" : "i1.0";
    std::string b_v = types.at("l2").at("i1.0") == "V" ? "i1.0" : "i1.1";
    std::string b_h = b_v == "i1.0" ? "i1.1" : "i1.0";
    if (t.count({a_h, b_v, "i0.0"}) != 1 || t.count({a_v, b_h, "i0.0"}) != 1 ||
        t.count({a_h, b_h, "i0.0"}) != 0 || t.count({a_v, b_v, "i0.0"}) != 0) {
        ok = false;
        log << "saddle pairing counts off\n";
    }

    // numeric stability: half the step, double the seed grid
    Backend fine = base;
    fine.tol.h = base.tol.h / 2;
    Backend dense = base;
    dense.tol.seed_grid = base.tol.seed_grid * 2;
    for (const Backend* v : {&fine, &dense}) {
        OperationTable tv = build_operation_table(s, *v);
        if (tv.entries.size() != t.entries.size()) {
            ok = false;
            log << "entry set changed under retuned numerics\n";
            continue;
        }
        for (const auto& [tuple, e] : t.entries)
            if (tv.entries.at(tuple).count != e.count) {
                ok = false;
                log << "count moved under retuned numerics\n";
            }
    }
    return ok;
}

// 7: triple product associativity -----------------------------------------

bool criterion7(std::ostream& log) {
    Backend b = default_backend(ManifoldKind::torus);
    MetricStructure sl = load_structure(fx("tree_left.structure"));
    MetricStructure sr = load_structure(fx("tree_right.structure"));
    OperationTable tl = build_operation_table(sl, b);
    OperationTable tr = build_operation_table(sr, b);
    bool ok = true;
    if (tl.entries.size() != 28 || tr.entries.size() != 28) {
        ok = false;
        log << "tables have " << tl.entries.size() << " and " << tr.entries.size()
            << " entries, want 28 each\n";
    }
    for (const auto& [tuple, e] : tl.entries) {
        auto it = tr.entries.find(tuple);
        if (it == tr.entries.end() || it->second.count != e.count) {
            ok = false;
            log << "trees disagree at";
            for (const auto& id : tuple) log << " " << id;
            log << "\n";
        }
    }
    if (ringcheck::table_ring_mismatches(sl, b, tl, &log) != 0) ok = false;
    return ok;
}

// 8: gluing composition ----------------------------------------------------

bool criterion8(std::ostream& log) {
    Backend b = default_backend(ManifoldKind::torus);
    ComparisonReport rep =
        check_gluing(load_structure(fx("y_prod.structure")),
                     load_structure(fx("y_glue_b.structure")), b, {{"o", "m1"}});
    for (const auto& m : rep.mismatches) log << m << "\n";
    return rep.equal;
}

// 9: coincidence counts and euler parity -----------------------------------

oracle::mat3 quad_matrix(const FunctionSpec& sp) {
    const auto& p = sp.params;
    oracle::mat3 d{{{p.at("a"), 0, 0}, {0, p.at("b"), 0}, {0, 0, p.at("c")}}};
    oracle::mat3 r = oracle::rotation_zyx(p.at("rx"), p.at("ry"), p.at("rz"));
    return oracle::mul(oracle::mul(r, d), oracle::transpose(r));
}

std::vector<P3> junction_points(const SolveResult& r, const std::string& v) {
    std::vector<P3> out;
    for (const auto& f : r.flows) out.push_back(f.junction_values.at(v));
    return out;
}

bool criterion9(std::ostream& log) {
    bool ok = true;
    std::vector<LeafConstraint> cons{{"p", "i2.0"}};

    // flat torus: separable sweep oracle, even count
    {
        Backend b = default_backend(ManifoldKind::torus);
        MetricStructure s = load_structure(fx("lollipop_torus.structure"));
        SolveResult r = solve_graph_flows(s, b, cons);
        int want = oracle::torus_coincidence_count(cos2_params(b, "cos2.a"), s.length("e1"),
                                                   cos2_params(b, "cos2.b"), s.length("e2"));
        if (r.status != "isolated" || r.count() != want || r.count_mod2() != 0) {
            ok = false;
            log << "torus: status " << r.status << " count " << r.count() << ", oracle "
                << want << "\n";
        }
    }

    // round sphere: eigenline oracle, even count
    {
        Backend b = default_backend(ManifoldKind::sphere);
        MetricStructure s = load_structure(fx("lollipop_sphere.structure"));
        SolveResult r = solve_graph_flows(s, b, cons);
        auto pts = oracle::sphere_coincidences(quad_matrix(b.spec("quad.a")), s.length("e1"),
                                               quad_matrix(b.spec("quad.b")), s.length("e2"));
        double d = support::set_distance(b.manifold, junction_points(r, "c"), pts);
        if (r.status != "isolated" || r.count_mod2() != 0 || d > kMatchTol) {
            ok = false;
            log << "sphere: status " << r.status << " count " << r.count()
                << " set distance " << d << "\n";
        }
    }

    // projective plane: folded eigenlines, odd count matching chi = 1
    {
        Backend b = default_backend(ManifoldKind::rp2);
        MetricStructure s = load_structure(fx("lollipop_rp2.structure"));
        SolveResult r = solve_graph_flows(s, b, cons);
        std::vector<P3> folded;
        for (const auto& v : oracle::sphere_coincidences(quad_matrix(b.spec("quad.a")),
                                                         s.length("e1"),
                                                         quad_matrix(b.spec("quad.b")),
                                                         s.length("e2"))) {
            P3 rep = oracle::rp2_rep(v);
            bool dup = false;
            for (const P3& w : folded) dup = dup || b.manifold.dist(rep, w) < kMatchTol;
            if (!dup) folded.push_back(rep);
        }
        double d = support::set_distance(b.manifold, junction_points(r, "c"), folded);
        if (r.status != "isolated" || r.count_mod2() != 1 || d > kMatchTol) {
            ok = false;
            log << "rp2: status " << r.status << " count " << r.count() << " set distance "
                << d << "\n";
        }
    }
    return ok;
}

// 10: dimension formulas against rank probes -------------------------------

struct SolveFixture {
    std::string file;
    ManifoldKind kind;
    std::vector<LeafConstraint> cons;
    int want_dim;
    std::string want_status;
    int want_count;  // -1 skips the count check
};

const std::vector<SolveFixture>& solver_fixtures() {
    static const std::vector<SolveFixture> fixtures{
        {"lollipop_torus.structure", ManifoldKind::torus, {{"p", "i2.0"}}, 0, "isolated", 4},
        {"lollipop_sphere.structure", ManifoldKind::sphere, {{"p", "i2.0"}}, 0, "isolated", 6},
        {"lollipop_rp2.structure", ManifoldKind::rp2, {{"p", "i2.0"}}, 0, "isolated", 3},
        {"lollipop_cycle_torus.structure",
         ManifoldKind::torus,
         {{"p", "i2.0"}},
         0,
         "isolated",
         4},
        {"theta_torus.structure", ManifoldKind::torus, {}, -2, "empty", 0},
        {"y_prod.structure", ManifoldKind::torus, {}, 2, "family", -1},
        {"y_prod.structure",
         ManifoldKind::torus,
         {{"l1", "i1.0"}, {"l2", "i1.0"}, {"o", "i0.0"}},
         0,
         "isolated",
         1},
        {"y_prod.structure",
         ManifoldKind::torus,
         {{"l1", "i1.0"}, {"l2", "i1.1"}, {"o", "i0.0"}},
         0,
         "empty",
         0},
        {"y_prod.structure",
         ManifoldKind::torus,
         {{"l1", "i2.0"}, {"l2", "i1.0"}, {"o", "i1.1"}},
         0,
         "isolated",
         1},
        {"path2.structure", ManifoldKind::torus, {{"p", "i0.0"}, {"q", "i0.0"}}, 0, "isolated",
         1},
        {"star4.structure",
         ManifoldKind::torus,
         {{"l1", "i1.0"}, {"l2", "i1.0"}, {"l3", "i2.0"}, {"o", "i0.0"}},
         0,
         "isolated",
         1},
        {"tree_left.structure",
         ManifoldKind::torus,
         {{"l1", "i1.0"}, {"l2", "i1.0"}, {"l3", "i2.0"}, {"o", "i0.0"}},
         0,
         "isolated",
         1},
    };
    return fixtures;
}

bool criterion10(std::ostream& log) {
    bool ok = true;

    // the loopspace formula, checked against a direct evaluation
    std::mt19937 rng(kSeed);
    std::uniform_int_distribution<int> nin(0, 3), nout(0, 2), chi(-4, 4), dd(2, 3);
    for (int i = 0; i < 100; i++) {
        DimensionQuery q;
        q.d = dd(rng);
        q.chi = chi(rng);
        std::uniform_int_distribution<int> idx(0, q.d);
        int manual = q.chi * q.d;
        for (int k = nin(rng); k > 0; k--) {
            q.in_indices.push_back(idx(rng));
            manual += q.in_indices.back();
        }
        for (int k = nout(rng); k > 0; k--) {
            q.out_indices.push_back(idx(rng));
            manual -= q.out_indices.back();
        }
        if (expected_dimension_loopspace(q) != manual) {
            log << "loopspace formula query " << i << " disagrees\n";
            return false;
        }
    }

    // the finite formula against the solver's own grading and the numeric
    // rank of the shooting system at accepted points
    for (const SolveFixture& f : solver_fixtures()) {
        Backend b = default_backend(f.kind);
        MetricStructure s = load_structure(fx(f.file));
        FlowProblem prob(s, b, f.cons);
        std::string tag = f.file + "(" + std::to_string(f.cons.size()) + " cons)";

        bool all_leaves_constrained = f.cons.size() == s.graph.leaves.size();
        if (all_leaves_constrained) {
            DimensionQuery q;
            q.chi = betti_and_euler(s.graph).chi;
            for (const LeafConstraint& lc : f.cons) {
                int idx = lc.crit[1] - '0';
                if (s.graph.leaves.at(lc.leaf))
                    q.in_indices.push_back(idx);
                else
                    q.out_indices.push_back(idx);
            }
            if (expected_dimension_finite(q) != f.want_dim) {
                ok = false;
                log << tag << ": finite formula gives " << expected_dimension_finite(q)
                    << ", want " << f.want_dim << "\n";
            }
        }
        if (prob.expected_dim() != f.want_dim) {
            ok = false;
            log << tag << ": solver grading " << prob.expected_dim() << ", want "
                << f.want_dim << "\n";
        }

        SolveResult r = prob.solve();
        if (r.status != f.want_status || (f.want_count >= 0 && r.count() != f.want_count)) {
            ok = false;
            log << tag << ": status " << r.status << " count " << r.count() << "\n";
            continue;
        }
        int unknowns = 2 * static_cast<int>(prob.junctions().size());
        if (r.status == "isolated") {
            for (const GraphFlowSolution& sol : r.flows) {
                int rank = prob.jacobian_rank(sol.junction_values);
                if (rank != unknowns) {
                    ok = false;
                    log << tag << ": rank " << rank << " of " << unknowns
                        << " at an isolated point\n";
                }
            }
        } else if (r.status == "family") {
            if (r.family_dim != f.want_dim) {
                ok = false;
                log << tag << ": family dim " << r.family_dim << "\n";
            }
            if (!r.flows.empty()) {
                int rank = prob.jacobian_rank(r.flows.front().junction_values);
                if (unknowns - rank != f.want_dim) {
                    ok = false;
                    log << tag << ": rank deficit " << unknowns - rank << ", want "
                        << f.want_dim << "\n";
                }
            }
        }
    }
    return ok;
}

// 11: automorphism equivariance of solution sets ---------------------------

MetricStructure pull_back(const MetricStructure& s, const GraphMorphism& sigma) {
    MetricStructure out = s;
    out.lengths.clear();
    out.labels.clear();
    for (const Edge& e : s.graph.edges) {
        const std::string& image = *sigma.edge_map.at(e.id);
        auto len = s.lengths.find(image);
        if (len != s.lengths.end()) out.lengths[e.id] = len->second;
        auto lab = s.labels.find(image);
        if (lab != s.labels.end()) out.labels[e.id] = lab->second;
    }
    return out;
}

std::vector<LeafConstraint> pull_back_constraints(const std::vector<LeafConstraint>& cons,
                                                  const GraphMorphism& sigma) {
    std::map<std::string, std::string> inverse;
    for (const auto& [v, w] : sigma.vertex_map) inverse[w] = v;
    std::vector<LeafConstraint> out;
    for (const LeafConstraint& lc : cons) out.push_back({inverse.at(lc.leaf), lc.crit});
    return out;
}

// every flow of `from`, transported through sigma, appears among `to`
bool transported_subset(const Manifold& m, const SolveResult& from, const SolveResult& to,
                        const GraphMorphism& sigma, const std::vector<std::string>& junctions) {
    for (const GraphFlowSolution& f : from.flows) {
        bool found = false;
        for (const GraphFlowSolution& g : to.flows) {
            double worst = 0;
            for (const std::string& v : junctions)
                worst = std::max(
                    worst, m.dist(g.junction_values.at(v),
                                  f.junction_values.at(sigma.vertex_map.at(v))));
            if (worst < kMatchTol) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

bool criterion11(std::ostream& log) {
    bool ok = true;
    for (const SolveFixture& f : solver_fixtures()) {
        Backend b = default_backend(f.kind);
        MetricStructure s = load_structure(fx(f.file));
        FlowProblem prob(s, b, f.cons);
        SolveResult r = prob.solve();
        if (r.flows.empty()) continue;

        AutomorphismGroup aut = compute_automorphisms(s.graph);
        for (size_t ai = 0; ai < aut.elements.size(); ai++) {
            const GraphMorphism& sigma = aut.elements[ai];

            // metric-preserving symmetries must permute the accepted set
            bool preserves = true;
            for (const Edge& e : s.graph.edges) {
                const std::string& image = *sigma.edge_map.at(e.id);
                bool has_a = s.lengths.count(e.id) > 0, has_b = s.lengths.count(image) > 0;
                if (has_a != has_b ||
                    (has_a && s.lengths.at(e.id) != s.lengths.at(image)) ||
                    s.labels.at(e.id) != s.labels.at(image))
                    preserves = false;
            }
            if (preserves && !transported_subset(b.manifold, r, r, sigma, prob.junctions())) {
                ok = false;
                log << f.file << ": solution set not closed under automorphism " << ai << "\n";
            }

            // every automorphism relates the problem to its pulled-back twin
            if (ai == 0) continue;  // identity adds nothing
            MetricStructure ps = pull_back(s, sigma);
            std::vector<LeafConstraint> pcons = pull_back_constraints(f.cons, sigma);
            FlowProblem pulled(ps, b, pcons);
            SolveResult pr = pulled.solve();
            if (pr.status != r.status || pr.count() != r.count() ||
                !transported_subset(b.manifold, r, pr, sigma, prob.junctions()) ||
                !transported_subset(b.manifold, pr, r, sigma, prob.junctions())) {
                ok = false;
                log << f.file << ": pullback along automorphism " << ai << " moved the set ("
                    << pr.status << " " << pr.count() << " vs " << r.status << " "
                    << r.count() << ")\n";
            }
        }
    }
    return ok;
}

}  // namespace acc

int main(int argc, char** argv) {
    std::vector<int> chosen;
    for (int i = 1; i < argc; i++) chosen.push_back(std::atoi(argv[i]));

    struct Criterion {
        int n;
        const char* label;
        double budget;
        bool (*fn)(std::ostream&);
    };
    const std::vector<Criterion> all{
        {1, "boundary cycle words and surface invariants", 1, acc::criterion1},
        {2, "random fat graph boundary laws", 10, acc::criterion2},
        {3, "critical inventories, homology ranks, boundary squared", 60, acc::criterion3},
        {4, "finite-difference derivative agreement", 5, acc::criterion4},
        {5, "tree propagation against the separable flow", 10, acc::criterion5},
        {6, "product table against the intersection ring", 600, acc::criterion6},
        {7, "triple product associativity", 1200, acc::criterion7},
        {8, "gluing composition", 1200, acc::criterion8},
        {9, "coincidence counts and euler parity", 600, acc::criterion9},
        {10, "dimension formulas against rank probes", 60, acc::criterion10},
        {11, "automorphism equivariance of solution sets", 600, acc::criterion11},
    };

    bool all_ok = true;
    for (const Criterion& c : all) {
        if (!chosen.empty() && std::find(chosen.begin(), chosen.end(), c.n) == chosen.end())
            continue;
        std::ostringstream log;
        bool ok = false;
        auto t0 = std::chrono::steady_clock::now();
        try {
            ok = c.fn(log);
        } catch (const std::exception& e) {
            log << "unexpected exception: " << e.what() << "\n";
        }
        double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && dt > c.budget) {
            ok = false;
            log << "time budget exceeded\n";
        }
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.n << ": " << c.label
                  << " (" << std::fixed << std::setprecision(2) << dt << "s, budget "
                  << std::setprecision(0) << c.budget << "s)\n";
        if (!ok) {
            all_ok = false;
            std::istringstream lines(log.str());
            std::string line;
            while (std::getline(lines, line)) std::cout << "    " << line << "\n";
        }
    }
    return all_ok ? 0 : 1;
}
