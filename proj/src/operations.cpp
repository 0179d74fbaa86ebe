#include "graphflow/operations.hpp"

#include "graphflow/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace graphflow {

int expected_dimension_loopspace(const DimensionQuery& q) {
    int s = 0;
    for (int i : q.in_indices) s += i;
    for (int o : q.out_indices) s -= o;
    return s + q.chi * q.d;
}

int expected_dimension_finite(const DimensionQuery& q) {
    int p = static_cast<int>(q.in_indices.size());
    int s = 0;
    for (int i : q.in_indices) s += i;
    for (int o : q.out_indices) s -= o;
    return q.d * (q.chi - p) + s;
}

namespace {

std::string join_tuple(const std::vector<std::string>& t) {
    std::string s;
    for (size_t i = 0; i < t.size(); i++) {
        if (i) s += ",";
        s += t[i];
    }
    return s;
}

}  // namespace

OperationTable build_operation_table(const MetricStructure& s, const Backend& b) {
    OperationTable t;
    StructureCache cache = build_structure_cache(s, b);
    for (const auto& [v, in] : s.graph.leaves) (in ? t.in_leaves : t.out_leaves).push_back(v);
    std::sort(t.in_leaves.begin(), t.in_leaves.end());
    std::sort(t.out_leaves.begin(), t.out_leaves.end());

    std::vector<std::string> order = t.in_leaves;
    order.insert(order.end(), t.out_leaves.begin(), t.out_leaves.end());
    for (const std::string& leaf : order) {
        const std::string& key = s.labels.at(s.graph.leaf_edge(leaf).id);
        for (const auto& cp : cache.crit_sets.at(key)) t.basis[leaf].push_back(cp.id);
    }

    // odometer over the per-leaf bases
    std::vector<std::vector<std::string>> tuples;
    std::vector<size_t> idx(order.size(), 0);
    while (true) {
        std::vector<std::string> tup;
        for (size_t i = 0; i < order.size(); i++) tup.push_back(t.basis.at(order[i])[idx[i]]);
        tuples.push_back(std::move(tup));
        size_t k = order.size();
        while (k > 0) {
            k--;
            if (++idx[k] < t.basis.at(order[k]).size()) break;
            idx[k] = 0;
            if (k == 0) {
                k = SIZE_MAX;
                break;
            }
        }
        if (k == SIZE_MAX || order.empty()) break;
    }

    struct Slot {
        bool zero_dim = false;
        TableEntry entry;
    };
    std::vector<Slot> slots(tuples.size());
    parallel_for(tuples.size(), [&](size_t i) {
        std::vector<LeafConstraint> cons;
        for (size_t k = 0; k < order.size(); k++) cons.push_back({order[k], tuples[i][k]});
        FlowProblem prob(s, b, cons, &cache);
        int expdim = prob.expected_dim();
        if (expdim != 0) return;
        slots[i].zero_dim = true;
        slots[i].entry.expdim = 0;
        try {
            SolveResult r = prob.solve(false);
            slots[i].entry.count = r.count_mod2();
            slots[i].entry.raw = r.count();
            slots[i].entry.status = r.status;
        } catch (const domain_error& e) {
            slots[i].entry.status = std::string("failed: ") + e.what();
        }
    });
    for (size_t i = 0; i < tuples.size(); i++) {
        if (!slots[i].zero_dim) continue;
        if (slots[i].entry.status.rfind("failed", 0) == 0) t.partial = true;
        t.entries[tuples[i]] = slots[i].entry;
    }
    return t;
}

ComparisonReport check_homotopy_invariance(const MetricStructure& a, const MetricStructure& b,
                                           const Backend& backend,
                                           const std::map<std::string, std::string>& rename) {
    ComparisonReport rep;
    OperationTable ta = build_operation_table(a, backend);
    OperationTable tb = build_operation_table(b, backend);

    auto mapped = [&](const std::string& leaf) {
        auto it = rename.find(leaf);
        return it == rename.end() ? leaf : it->second;
    };
    std::vector<std::string> oa = ta.in_leaves, ob = tb.in_leaves;
    oa.insert(oa.end(), ta.out_leaves.begin(), ta.out_leaves.end());
    ob.insert(ob.end(), tb.out_leaves.begin(), tb.out_leaves.end());
    if (oa.size() != ob.size()) {
        rep.equal = false;
        rep.mismatches.push_back("leaf counts differ");
        return rep;
    }
    std::vector<size_t> pos(oa.size());
    for (size_t i = 0; i < oa.size(); i++) {
        std::string want = mapped(oa[i]);
        auto it = std::find(ob.begin(), ob.end(), want);
        if (it == ob.end()) {
            rep.equal = false;
            rep.mismatches.push_back("leaf " + oa[i] + " has no counterpart " + want);
            return rep;
        }
        pos[i] = static_cast<size_t>(it - ob.begin());
        bool a_in = i < ta.in_leaves.size();
        bool b_in = pos[i] < tb.in_leaves.size();
        if (a_in != b_in) {
            rep.equal = false;
            rep.mismatches.push_back("leaf " + oa[i] + " flips direction under the rename");
            return rep;
        }
        if (ta.basis.at(oa[i]) != tb.basis.at(want)) {
            rep.equal = false;
            rep.mismatches.push_back("bases differ at leaf " + oa[i]);
            return rep;
        }
    }

    for (const auto& [tup, ea] : ta.entries) {
        std::vector<std::string> btup(tup.size());
        for (size_t i = 0; i < tup.size(); i++) btup[pos[i]] = tup[i];
        const TableEntry* eb = tb.entry(btup);
        if (!eb) {
            rep.equal = false;
            rep.mismatches.push_back("(" + join_tuple(tup) + "): missing on the right");
            continue;
        }
        if (ea.count != eb->count) {
            rep.equal = false;
            std::ostringstream os;
            os << "(" << join_tuple(tup) << "): left=" << ea.count << " right=" << eb->count;
            rep.mismatches.push_back(os.str());
        }
    }
    if (ta.entries.size() != tb.entries.size()) {
        rep.equal = false;
        rep.mismatches.push_back("entry counts differ");
    }
    return rep;
}

MetricStructure glue_structures(const MetricStructure& s1, const MetricStructure& s2,
                                const std::map<std::string, std::string>& matching) {
    MetricStructure g;
    g.graph = glue(s1.graph, s2.graph, matching);
    for (const auto& [e, len] : s1.lengths) g.lengths["a." + e] = len;
    for (const auto& [e, len] : s2.lengths) g.lengths["b." + e] = len;
    for (const auto& [e, key] : s1.labels) g.labels["a." + e] = key;
    for (const auto& [e, key] : s2.labels) g.labels["b." + e] = key;
    for (const auto& [o, i] : matching) {
        const std::string& e1 = s1.graph.leaf_edge(o).id;
        const std::string& e2 = s2.graph.leaf_edge(i).id;
        auto l1 = s1.labels.find(e1);
        auto l2 = s2.labels.find(e2);
        if (l1 == s1.labels.end() || l2 == s2.labels.end() || l1->second != l2->second)
            throw domain_error("glued leaves " + o + " and " + i +
                               " carry different function labels");
        // the matched half-infinite ends become one finite serial pair; the
        // counts do not depend on the length chosen, so keep the neck short
        // relative to the flow rate
        g.lengths["a." + e1] = 0.05;
        g.lengths["b." + e2] = 0.05;
    }
    g.validate();
    return g;
}

ComparisonReport check_gluing(const MetricStructure& s1, const MetricStructure& s2,
                              const Backend& backend,
                              const std::map<std::string, std::string>& matching) {
    ComparisonReport rep;
    OperationTable t1 = build_operation_table(s1, backend);
    OperationTable t2 = build_operation_table(s2, backend);
    MetricStructure gs = glue_structures(s1, s2, matching);
    OperationTable tg = build_operation_table(gs, backend);

    // position bookkeeping: a glued tuple splits into a t1 tuple and a t2
    // tuple once the middle assignment is chosen
    std::vector<std::string> gorder = tg.in_leaves;
    gorder.insert(gorder.end(), tg.out_leaves.begin(), tg.out_leaves.end());
    auto index_of = [](const std::vector<std::string>& v, const std::string& x) {
        auto it = std::find(v.begin(), v.end(), x);
        if (it == v.end()) throw invariant_error("leaf bookkeeping broke at " + x);
        return static_cast<size_t>(it - v.begin());
    };

    size_t n1 = t1.in_leaves.size() + t1.out_leaves.size();
    size_t n2 = t2.in_leaves.size() + t2.out_leaves.size();
    // slots of the t1/t2 tuples fed from the glued tuple, SIZE_MAX = middle
    std::vector<size_t> from_g1(n1, SIZE_MAX), from_g2(n2, SIZE_MAX);
    for (size_t i = 0; i < gorder.size(); i++) {
        const std::string& leaf = gorder[i];
        if (leaf.rfind("a.", 0) == 0)
            from_g1[index_of(t1.in_leaves, leaf.substr(2))] = i;
        else if (i < tg.in_leaves.size())
            from_g2[index_of(t2.in_leaves, leaf.substr(2))] = i;
        else
            from_g2[t2.in_leaves.size() + index_of(t2.out_leaves, leaf.substr(2))] = i;
    }
    // middle slots: t1 out position k pairs with the matched t2 in position
    std::vector<std::pair<size_t, size_t>> middle;  // (t1 slot, t2 slot)
    for (size_t k = 0; k < t1.out_leaves.size(); k++) {
        const std::string& o = t1.out_leaves[k];
        middle.push_back({t1.in_leaves.size() + k, index_of(t2.in_leaves, matching.at(o))});
    }
    std::vector<std::vector<std::string>> middle_basis;
    for (size_t k = 0; k < t1.out_leaves.size(); k++)
        middle_basis.push_back(t1.basis.at(t1.out_leaves[k]));

    for (const auto& [gtup, ge] : tg.entries) {
        std::vector<std::string> tup1(n1), tup2(n2);
        for (size_t j = 0; j < n1; j++)
            if (from_g1[j] != SIZE_MAX) tup1[j] = gtup[from_g1[j]];
        for (size_t j = 0; j < n2; j++)
            if (from_g2[j] != SIZE_MAX) tup2[j] = gtup[from_g2[j]];
        int total = 0;
        std::vector<size_t> mi(middle.size(), 0);
        while (true) {
            for (size_t k = 0; k < middle.size(); k++) {
                tup1[middle[k].first] = middle_basis[k][mi[k]];
                tup2[middle[k].second] = middle_basis[k][mi[k]];
            }
            total += t1.count(tup1) * t2.count(tup2);
            size_t k = middle.size();
            while (k > 0) {
                k--;
                if (++mi[k] < middle_basis[k].size()) break;
                mi[k] = 0;
                if (k == 0) {
                    k = SIZE_MAX;
                    break;
                }
            }
            if (k == SIZE_MAX || middle.empty()) break;
        }
        total %= 2;
        if (total != ge.count) {
            rep.equal = false;
            std::ostringstream os;
            os << "(" << join_tuple(gtup) << "): composite=" << total << " glued=" << ge.count;
            rep.mismatches.push_back(os.str());
        }
    }
    if (t1.partial || t2.partial || tg.partial) {
        rep.equal = false;
        rep.mismatches.push_back("a table failed to resolve some tuple");
    }
    return rep;
}

}  // namespace graphflow
