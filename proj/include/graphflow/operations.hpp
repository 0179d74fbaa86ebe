#pragma once

#include "graphflow/flow.hpp"

#include <map>
#include <string>
#include <vector>

namespace graphflow {

// grading bookkeeping for constrained flow moduli
struct DimensionQuery {
    std::vector<int> in_indices;
    std::vector<int> out_indices;
    int chi = 0;  // of the graph, leaves included
    int d = 2;
};

// sum(in) - sum(out) + chi * d
int expected_dimension_loopspace(const DimensionQuery& q);
// d * (chi - p) + sum(in) - sum(out), with p the number of incoming leaves
int expected_dimension_finite(const DimensionQuery& q);

struct TableEntry {
    int count = 0;  // mod 2
    int raw = 0;    // isolated solutions before reduction
    int expdim = 0;
    std::string status;
};

// Mod-2 counts indexed by critical-point tuples. A tuple runs over the
// incoming leaves in sorted order, then the outgoing ones. Only
// zero-dimensional tuples get entries; everything else stays silent.
struct OperationTable {
    std::vector<std::string> in_leaves;
    std::vector<std::string> out_leaves;
    std::map<std::string, std::vector<std::string>> basis;  // leaf -> crit ids
    std::map<std::vector<std::string>, TableEntry> entries;
    bool partial = false;  // some tuple failed to resolve

    const TableEntry* entry(const std::vector<std::string>& tuple) const {
        auto it = entries.find(tuple);
        return it == entries.end() ? nullptr : &it->second;
    }
    int count(const std::vector<std::string>& tuple) const {
        const TableEntry* e = entry(tuple);
        return e ? e->count : 0;
    }
};

OperationTable build_operation_table(const MetricStructure& s, const Backend& b);

struct ComparisonReport {
    bool equal = true;
    std::vector<std::string> mismatches;
};

// Entrywise mod-2 comparison of the operation tables of two structures.
// `rename` maps leaves of `a` onto leaves of `b`; unnamed leaves match by
// their own id.
ComparisonReport check_homotopy_invariance(const MetricStructure& a, const MetricStructure& b,
                                           const Backend& backend,
                                           const std::map<std::string, std::string>& rename = {});

// Metric structure on the glued graph: lengths and labels carry over with
// the a./b. prefixes, and the two halves of each glued leaf pair become
// short finite internal edges. The matched leaf edges must agree on their
// function label.
MetricStructure glue_structures(const MetricStructure& s1, const MetricStructure& s2,
                                const std::map<std::string, std::string>& matching);

// Contract table(s1) with table(s2) over the matched leaves (shared basis,
// products of counts summed mod 2) and compare against the table of the
// glued structure.
ComparisonReport check_gluing(const MetricStructure& s1, const MetricStructure& s2,
                              const Backend& backend,
                              const std::map<std::string, std::string>& matching);

}  // namespace graphflow
