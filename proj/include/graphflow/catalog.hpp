#pragma once

#include "graphflow/manifold.hpp"

#include <map>
#include <set>
#include <string>

namespace graphflow {

// A catalog entry: a function family plus parameters. Families:
//   cos2      (torus)        ax*cos 2pi(x-px) + ay*cos 2pi(y-py)
//                            + delta*cos 2pi(x-px)*cos 2pi(y-py)
//   height    (sphere)       <u, p>
//   quadratic (sphere, rp2)  p^T R diag(a,b,c) R^T p,  R = Rz Ry Rx
struct FunctionSpec {
    std::string kind;
    std::map<std::string, double> params;  // normalized: defaults filled in
};

// Flattened evaluator; build once, evaluate in inner loops.
struct CompiledFunction {
    ManifoldKind manifold;
    int kind = 0;  // 0 cos2, 1 height, 2 quadratic
    double ax = 1, ay = 1, px = 0, py = 0, delta = 0;
    P3 u{0, 0, 1};
    double M[3][3] = {};  // symmetric, quadratic form

    double f(const P3& p) const;
    // gradient tangent to the manifold, ambient coordinates
    P3 grad(const P3& p) const;
    // Hessian in the orthonormal frame at p: [h00, h01, h10, h11]
    std::array<double, 4> hess_chart(const P3& p, const std::array<P3, 2>& basis) const;
};

struct Backend {
    Manifold manifold{ManifoldKind::torus};
    std::string primary;  // the function= selection
    std::map<std::string, FunctionSpec> catalog;
    Tolerances tol;

    const FunctionSpec& spec(const std::string& key) const;
    std::set<std::string> keys() const;
};

FunctionSpec make_spec(ManifoldKind m, const std::string& kind,
                       const std::map<std::string, double>& params);
CompiledFunction compile(const Manifold& m, const FunctionSpec& spec);
bool same_function(const FunctionSpec& a, const FunctionSpec& b);

// built-in catalog: a reference entry per manifold plus phase/rotation
// variants so structures can label adjacent edges distinctly
Backend default_backend(ManifoldKind m);

// key=value lines: manifold=, function=, param.<name>=, tol.<name>=
Backend parse_backend_config(const std::string& text);
Backend load_backend_config(const std::string& path);

}  // namespace graphflow
