#include "graphflow/manifold.hpp"

#include "graphflow/graph.hpp"

namespace graphflow {

std::string to_string(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::torus: return "torus";
        case ManifoldKind::sphere: return "sphere";
        case ManifoldKind::rp2: return "rp2";
    }
    return "?";
}

ManifoldKind manifold_from_string(const std::string& s) {
    if (s == "torus") return ManifoldKind::torus;
    if (s == "sphere") return ManifoldKind::sphere;
    if (s == "rp2") return ManifoldKind::rp2;
    throw domain_error("unknown manifold: " + s);
}

namespace {

double wrap01(double x) {
    double w = x - std::floor(x);
    if (w >= 1.0) w -= 1.0;  // floor of a tiny negative can round this way
    return w;
}

double wrap_half(double d) {
    double w = wrap01(d);
    if (w > 0.5) w -= 1.0;
    return w;
}

}  // namespace

P3 Manifold::canonicalize(P3 p) const {
    switch (kind_) {
        case ManifoldKind::torus:
            return {wrap01(p[0]), wrap01(p[1]), 0.0};
        case ManifoldKind::sphere: {
            double n = norm3(p);
            if (n < 1e-14) throw domain_error("cannot normalize zero vector");
            return scale3(p, 1.0 / n);
        }
        case ManifoldKind::rp2: {
            double n = norm3(p);
            if (n < 1e-14) throw domain_error("cannot normalize zero vector");
            P3 q = scale3(p, 1.0 / n);
            for (int i = 0; i < 3; i++) {
                if (std::abs(q[i]) > 1e-12) {
                    if (q[i] < 0) q = scale3(q, -1.0);
                    break;
                }
            }
            return q;
        }
    }
    return p;
}

std::array<P3, 2> Manifold::tangent_basis(const P3& p) const {
    if (kind_ == ManifoldKind::torus)
        return {P3{1, 0, 0}, P3{0, 1, 0}};
    // pick the ambient axis least aligned with p, then Gram-Schmidt
    int axis = 0;
    double best = std::abs(p[0]);
    for (int i = 1; i < 3; i++)
        if (std::abs(p[i]) < best) {
            best = std::abs(p[i]);
            axis = i;
        }
    P3 e{0, 0, 0};
    e[axis] = 1;
    P3 b0 = sub3(e, scale3(p, dot3(e, p)));
    b0 = scale3(b0, 1.0 / norm3(b0));
    P3 b1{p[1] * b0[2] - p[2] * b0[1], p[2] * b0[0] - p[0] * b0[2],
          p[0] * b0[1] - p[1] * b0[0]};  // p x b0
    return {b0, b1};
}

V2 Manifold::chart_diff(const P3& p, const P3& q_in) const {
    if (kind_ == ManifoldKind::torus)
        return {wrap_half(q_in[0] - p[0]), wrap_half(q_in[1] - p[1])};
    P3 q = q_in;
    if (kind_ == ManifoldKind::rp2 && dot3(p, q) < 0) q = scale3(q, -1.0);
    double c = dot3(p, q);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    double theta = std::acos(c);
    auto basis = tangent_basis(p);
    P3 v = sub3(q, scale3(p, c));
    double vn = norm3(v);
    if (vn < 1e-14) {
        // q at p (theta ~ 0) or antipodal (no preferred direction)
        if (theta < 1.0) return {0.0, 0.0};
        return {theta, 0.0};
    }
    P3 u = scale3(v, 1.0 / vn);
    return {theta * dot3(u, basis[0]), theta * dot3(u, basis[1])};
}

P3 Manifold::retract(const P3& p, const V2& d) const {
    if (kind_ == ManifoldKind::torus)
        return {wrap01(p[0] + d[0]), wrap01(p[1] + d[1]), 0.0};
    auto basis = tangent_basis(p);
    P3 t = add3(scale3(basis[0], d[0]), scale3(basis[1], d[1]));
    double n = norm2(d);
    if (n < 1e-15) return p;
    P3 u = scale3(t, 1.0 / n);
    P3 q = add3(scale3(p, std::cos(n)), scale3(u, std::sin(n)));
    return canonicalize(q);
}

P3 Manifold::project(P3 p) const {
    if (kind_ == ManifoldKind::torus) return {wrap01(p[0]), wrap01(p[1]), 0.0};
    double n = norm3(p);
    return scale3(p, 1.0 / n);  // integration keeps one sphere lift; no sign fix here
}

P3 Manifold::random_point(std::mt19937& rng) const {
    if (kind_ == ManifoldKind::torus) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        return {u(rng), u(rng), 0.0};
    }
    std::normal_distribution<double> g(0.0, 1.0);
    P3 p{g(rng), g(rng), g(rng)};
    while (norm3(p) < 1e-6) p = {g(rng), g(rng), g(rng)};
    return canonicalize(p);
}

std::vector<P3> Manifold::seed_points(int n) const {
    std::vector<P3> out;
    if (kind_ == ManifoldKind::torus) {
        for (int i = 0; i < n; i++)
            for (int j = 0; j < n; j++)
                out.push_back({(i + 0.5) / n, (j + 0.5) / n, 0.0});
        return out;
    }
    // Fibonacci sweep; the projective plane keeps canonical representatives
    int total = kind_ == ManifoldKind::rp2 ? n * n : 2 * n * n;
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < total; i++) {
        double z = kind_ == ManifoldKind::rp2 ? (i + 0.5) / total       // upper half
                                              : 1.0 - 2.0 * (i + 0.5) / total;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = 2.0 * M_PI * std::fmod(i / golden, 1.0);
        out.push_back(canonicalize({r * std::cos(phi), r * std::sin(phi), z}));
    }
    return out;
}

}  // namespace graphflow
