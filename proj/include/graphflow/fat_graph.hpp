#pragma once

#include "graphflow/graph.hpp"

#include <iosfwd>

namespace graphflow {

// Half-edge = one end of an edge. Token form: "E+" is the source end,
// "E-" the target end. The involution swaps the two ends.
struct HalfEdge {
    std::string edge;
    bool at_src = true;
    bool operator==(const HalfEdge& o) const { return edge == o.edge && at_src == o.at_src; }
    bool operator<(const HalfEdge& o) const {
        return edge != o.edge ? edge < o.edge : at_src > o.at_src;  // E+ before E-
    }
};

// Edge with a direction of traversal. Ordering puts the forward copy
// before the reversed one, which fixes all canonical forms below.
struct OrientedEdge {
    std::string edge;
    bool forward = true;
    bool operator==(const OrientedEdge& o) const {
        return edge == o.edge && forward == o.forward;
    }
    bool operator<(const OrientedEdge& o) const {
        return edge != o.edge ? edge < o.edge : forward > o.forward;
    }
    OrientedEdge reversed() const { return {edge, !forward}; }
};

std::string to_string(const OrientedEdge& o);  // "A" or "~A"

// Graph plus a cyclic order of half-edges at every vertex. Vertices of
// valence <= 2 have a unique cyclic order, so files may omit them.
struct FatGraph {
    OrientedGraph graph;
    std::map<std::string, std::vector<HalfEdge>> cyclic;  // vertex -> cyclic sequence
    std::map<int, bool> marks;                            // cycle index -> incoming?

    // strict additionally demands every non-leaf vertex be >= trivalent
    void validate(bool strict = false) const;
};

FatGraph parse_fat_graph(const std::string& text);
FatGraph load_fat_graph(const std::string& path);

// One cyclic word per boundary component of the thickened surface.
// Canonical form: each cycle rotated so its least oriented edge comes
// first, cycles sorted by their first entry.
struct BoundaryCyclePartition {
    std::vector<std::vector<OrientedEdge>> cycles;

    // index of the cycle containing o, or -1
    int cycle_of(const OrientedEdge& o) const;
};

BoundaryCyclePartition boundary_cycles(const FatGraph& fg);

struct SurfaceInvariants {
    int chi;        // |V| - |E|
    int boundary;   // number of boundary cycles
    int genus;      // from chi = 2 - 2g - n
};

SurfaceInvariants surface_invariants(const FatGraph& fg);

struct ChordDiagramReport {
    bool ok = false;
    std::vector<std::string> violations;  // edges whose two sides sit on like-marked cycles
};

// Needs every cycle marked in/out; an oriented edge on an incoming cycle
// must have its reversal on an outgoing one.
ChordDiagramReport is_chord_diagram(const FatGraph& fg);

struct CylinderAttachment {
    OrientedEdge edge;
    double offset_begin;
    double offset_end;
};

struct Cylinder {
    bool incoming;            // incoming: (-inf, 0], outgoing: [0, +inf)
    double circumference;
    std::vector<CylinderAttachment> word;  // tiles [0, circumference)
};

struct CylinderComplex {
    std::vector<Cylinder> cylinders;  // in canonical cycle order
};

CylinderComplex build_mapping_cylinder(const FatGraph& fg,
                                       const std::map<std::string, double>& lengths);

}  // namespace graphflow
