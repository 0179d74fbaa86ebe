#pragma once

#include "graphflow/catalog.hpp"
#include "graphflow/manifold.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace graphflow {

// One Morse function on one manifold, with the numeric knobs it was
// compiled against. The unit the rest of the library flows along.
struct MorseBackend {
    Manifold manifold{ManifoldKind::torus};
    CompiledFunction fn;
    Tolerances tol;
};

MorseBackend make_morse_backend(const Backend& b, const std::string& key);
inline MorseBackend make_morse_backend(const Backend& b) {
    return make_morse_backend(b, b.primary);
}

int manifold_euler_characteristic(ManifoldKind k);

struct CriticalPoint {
    std::string id;  // "i<index>.<ordinal>", ordinal by sorted location
    P3 location;
    int index = 0;
    double value = 0;
    std::array<double, 4> hess{};   // chart Hessian in frame
    std::array<P3, 2> frame;        // orthonormal chart frame at location
    std::array<double, 2> eigs{};   // Hessian eigenvalues, ascending
    V2 stable_dir{};                // chart eigenvector, positive eigenvalue
    V2 unstable_dir{};              // chart eigenvector, negative eigenvalue
};

// Newton on grad f = 0 from a uniform seed grid; throws "degenerate
// critical point" on a near-singular Hessian and complains when the
// alternating count disagrees with chi(M).
std::vector<CriticalPoint> find_critical_points(const MorseBackend& b);

struct Trajectory {
    std::vector<std::pair<double, P3>> samples;  // (time, point)
    bool forward = true;
};

// RK4 on dx/dt = -grad f (sign flipped when backward), fixed step,
// reprojected to the manifold after every step.
Trajectory integrate_trajectory(const MorseBackend& b, const P3& x0, double T, bool forward);

// same integrator without sample storage; t may be negative (backward)
P3 flow_point(const MorseBackend& b, const P3& x0, double t);

// Integrate until within tol.eps_limit of one of the given critical
// points (t=0 counts) or the time cap. Throws "no convergence by T_max".
std::string limit_critical_point(const MorseBackend& b, const std::vector<CriticalPoint>& crits,
                                 const P3& x, bool forward);

struct MorseComplex {
    std::vector<CriticalPoint> points;  // sorted by (index, location)
    // raw connecting-trajectory counts, keyed (upper id, lower id),
    // index difference exactly 1
    std::map<std::pair<std::string, std::string>, int> counts;

    const CriticalPoint& point(const std::string& id) const;
    std::vector<const CriticalPoint*> grade(int index) const;
    int count_mod2(const std::string& upper, const std::string& lower) const;
};

// Builds the boundary data: saddle-to-min by shooting the two unstable
// directions, max-to-saddle by a fine direction sweep with sign-change
// counting. Verifies dd = 0 over F2.
MorseComplex morse_complex(const MorseBackend& b);

// F2 homology ranks per degree (0..d)
std::vector<int> homology_ranks(const MorseComplex& c);

}  // namespace graphflow
