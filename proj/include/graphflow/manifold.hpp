#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace graphflow {

// Points live in ambient coordinates: the torus uses the first two entries
// (coordinates mod 1), sphere and projective plane use unit 3-vectors.
using P3 = std::array<double, 3>;
using V2 = std::array<double, 2>;

inline double dot3(const P3& a, const P3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm3(const P3& a) { return std::sqrt(dot3(a, a)); }
inline P3 add3(const P3& a, const P3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline P3 sub3(const P3& a, const P3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline P3 scale3(const P3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double norm2(const V2& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1]); }

// Numeric knobs, overridable via tol.<name>= in backend config files.
struct Tolerances {
    double h = 1e-3;            // RK4 step
    double eps_limit = 1e-4;    // radius for limit classification
    double t_max = 50.0;        // integration cap
    int grid = 64;              // critical-point seeding, points per chart side
    double dedup_crit = 1e-6;   // critical-point dedup radius
    double hess_eig = 1e-6;     // degeneracy threshold on Hessian eigenvalues
    double grad_zero = 1e-10;   // acceptance for a critical point
    int sweep = 4096;           // directions in the unstable-sphere sweep
    double newton_tol = 1e-8;   // solver residual acceptance
    int newton_maxiter = 40;
    double dedup_sol = 1e-5;    // solver solution dedup radius
    int seed_grid = 12;         // solver seed sweep, points per side
};

enum class ManifoldKind { torus, sphere, rp2 };

std::string to_string(ManifoldKind k);
ManifoldKind manifold_from_string(const std::string& s);

// Chart conventions: the torus chart is the coordinate square with
// differences wrapped to (-1/2, 1/2]; sphere and rp2 use the log map in an
// orthonormal tangent frame at the base point. The projective plane keeps
// the sign representative with first nonzero coordinate positive.
class Manifold {
  public:
    explicit Manifold(ManifoldKind k) : kind_(k) {}

    ManifoldKind kind() const { return kind_; }
    int ambient() const { return kind_ == ManifoldKind::torus ? 2 : 3; }

    P3 canonicalize(P3 p) const;
    std::array<P3, 2> tangent_basis(const P3& p) const;
    // chart coordinates of q in the frame at p
    V2 chart_diff(const P3& p, const P3& q) const;
    // exponential/retraction: walk from p by chart vector d
    P3 retract(const P3& p, const V2& d) const;
    double dist(const P3& p, const P3& q) const { return norm2(chart_diff(p, q)); }
    // keep an integration state on the manifold (wrap or renormalize)
    P3 project(P3 p) const;

    P3 random_point(std::mt19937& rng) const;
    // deterministic seed sweep, roughly uniform, about n*n points
    std::vector<P3> seed_points(int n) const;

  private:
    ManifoldKind kind_;
};

}  // namespace graphflow
