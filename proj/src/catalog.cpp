#include "graphflow/catalog.hpp"

#include "graphflow/graph.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace graphflow {

namespace {

const double TWO_PI = 2.0 * M_PI;

std::map<std::string, double> default_params(const std::string& kind) {
    if (kind == "cos2")
        return {{"ax", 1}, {"ay", 1}, {"px", 0}, {"py", 0}, {"delta", 0}};
    if (kind == "height") return {{"ux", 0}, {"uy", 0}, {"uz", 1}};
    if (kind == "quadratic")
        return {{"a", -4}, {"b", 0.8}, {"c", 4}, {"rx", 0}, {"ry", 0}, {"rz", 0}};
    throw domain_error("unknown function kind: " + kind);
}

void rot_matrix(double rx, double ry, double rz, double R[3][3]) {
    double cx = std::cos(rx), sx = std::sin(rx);
    double cy = std::cos(ry), sy = std::sin(ry);
    double cz = std::cos(rz), sz = std::sin(rz);
    // Rz * Ry * Rx
    R[0][0] = cz * cy;
    R[0][1] = cz * sy * sx - sz * cx;
    R[0][2] = cz * sy * cx + sz * sx;
    R[1][0] = sz * cy;
    R[1][1] = sz * sy * sx + cz * cx;
    R[1][2] = sz * sy * cx - cz * sx;
    R[2][0] = -sy;
    R[2][1] = cy * sx;
    R[2][2] = cy * cx;
}

}  // namespace

FunctionSpec make_spec(ManifoldKind m, const std::string& kind,
                       const std::map<std::string, double>& params) {
    if (m == ManifoldKind::torus && kind != "cos2")
        throw domain_error("torus catalog only knows cos2");
    if (m != ManifoldKind::torus && kind == "cos2")
        throw domain_error("cos2 lives on the torus");
    if (m == ManifoldKind::rp2 && kind == "height")
        throw domain_error("height is not antipodally symmetric; rp2 needs quadratic");
    FunctionSpec s;
    s.kind = kind;
    s.params = default_params(kind);
    for (const auto& [k, v] : params) {
        if (!s.params.count(k)) throw domain_error("unknown parameter " + k + " for " + kind);
        s.params[k] = v;
    }
    return s;
}

CompiledFunction compile(const Manifold& m, const FunctionSpec& spec) {
    CompiledFunction c;
    c.manifold = m.kind();
    auto p = [&](const char* k) { return spec.params.at(k); };
    if (spec.kind == "cos2") {
        c.kind = 0;
        c.ax = p("ax");
        c.ay = p("ay");
        c.px = p("px");
        c.py = p("py");
        c.delta = p("delta");
    } else if (spec.kind == "height") {
        c.kind = 1;
        P3 u{p("ux"), p("uy"), p("uz")};
        double n = norm3(u);
        if (n < 1e-12) throw domain_error("height axis is zero");
        c.u = scale3(u, 1.0 / n);
    } else if (spec.kind == "quadratic") {
        c.kind = 2;
        double R[3][3];
        rot_matrix(p("rx"), p("ry"), p("rz"), R);
        double d[3] = {p("a"), p("b"), p("c")};
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) {
                c.M[i][j] = 0;
                for (int k = 0; k < 3; k++) c.M[i][j] += R[i][k] * d[k] * R[j][k];
            }
    } else {
        throw domain_error("unknown function kind: " + spec.kind);
    }
    return c;
}

double CompiledFunction::f(const P3& q) const {
    switch (kind) {
        case 0: {
            double cx = std::cos(TWO_PI * (q[0] - px));
            double cy = std::cos(TWO_PI * (q[1] - py));
            return ax * cx + ay * cy + delta * cx * cy;
        }
        case 1:
            return dot3(u, q);
        default: {
            P3 Mq{M[0][0] * q[0] + M[0][1] * q[1] + M[0][2] * q[2],
                  M[1][0] * q[0] + M[1][1] * q[1] + M[1][2] * q[2],
                  M[2][0] * q[0] + M[2][1] * q[1] + M[2][2] * q[2]};
            return dot3(q, Mq);
        }
    }
}

P3 CompiledFunction::grad(const P3& q) const {
    switch (kind) {
        case 0: {
            double X = TWO_PI * (q[0] - px);
            double Y = TWO_PI * (q[1] - py);
            double gx = -TWO_PI * std::sin(X) * (ax + delta * std::cos(Y));
            double gy = -TWO_PI * std::sin(Y) * (ay + delta * std::cos(X));
            return {gx, gy, 0.0};
        }
        case 1: {
            double c = dot3(u, q);
            return sub3(u, scale3(q, c));
        }
        default: {
            P3 Mq{M[0][0] * q[0] + M[0][1] * q[1] + M[0][2] * q[2],
                  M[1][0] * q[0] + M[1][1] * q[1] + M[1][2] * q[2],
                  M[2][0] * q[0] + M[2][1] * q[1] + M[2][2] * q[2]};
            double c = dot3(q, Mq);
            return sub3(scale3(Mq, 2.0), scale3(q, 2.0 * c));
        }
    }
}

std::array<double, 4> CompiledFunction::hess_chart(const P3& q,
                                                   const std::array<P3, 2>& basis) const {
    switch (kind) {
        case 0: {
            double X = TWO_PI * (q[0] - px);
            double Y = TWO_PI * (q[1] - py);
            double w = TWO_PI * TWO_PI;
            double hxx = -w * std::cos(X) * (ax + delta * std::cos(Y));
            double hyy = -w * std::cos(Y) * (ay + delta * std::cos(X));
            double hxy = w * delta * std::sin(X) * std::sin(Y);
            return {hxx, hxy, hxy, hyy};
        }
        case 1: {
            // covariant Hessian of a linear function on the round sphere
            double c = dot3(u, q);
            return {-c, 0, 0, -c};
        }
        default: {
            P3 Mq{M[0][0] * q[0] + M[0][1] * q[1] + M[0][2] * q[2],
                  M[1][0] * q[0] + M[1][1] * q[1] + M[1][2] * q[2],
                  M[2][0] * q[0] + M[2][1] * q[1] + M[2][2] * q[2]};
            double radial = 2.0 * dot3(q, Mq);
            std::array<double, 4> H;
            for (int i = 0; i < 2; i++)
                for (int j = 0; j < 2; j++) {
                    P3 Mbj{M[0][0] * basis[j][0] + M[0][1] * basis[j][1] + M[0][2] * basis[j][2],
                           M[1][0] * basis[j][0] + M[1][1] * basis[j][1] + M[1][2] * basis[j][2],
                           M[2][0] * basis[j][0] + M[2][1] * basis[j][1] + M[2][2] * basis[j][2]};
                    H[2 * i + j] = 2.0 * dot3(basis[i], Mbj) - (i == j ? radial : 0.0);
                }
            return H;
        }
    }
}

const FunctionSpec& Backend::spec(const std::string& key) const {
    auto it = catalog.find(key);
    if (it == catalog.end()) throw domain_error("unknown catalog key: " + key);
    return it->second;
}

std::set<std::string> Backend::keys() const {
    std::set<std::string> out;
    for (const auto& [k, v] : catalog) {
        (void)v;
        out.insert(k);
    }
    return out;
}

bool same_function(const FunctionSpec& a, const FunctionSpec& b) {
    return a.kind == b.kind && a.params == b.params;
}

Backend default_backend(ManifoldKind m) {
    Backend b;
    b.manifold = Manifold(m);
    switch (m) {
        case ManifoldKind::torus:
            b.primary = "cos2";
            b.catalog["cos2"] = make_spec(m, "cos2", {});
            b.catalog["cos2.a"] = make_spec(m, "cos2", {{"px", 0.37}, {"py", 0.13}});
            b.catalog["cos2.b"] = make_spec(m, "cos2", {{"px", 0.71}, {"py", 0.52}});
            b.catalog["cos2.c"] = make_spec(m, "cos2", {{"px", 0.19}, {"py", 0.80}});
            b.catalog["cos2.d"] = make_spec(m, "cos2", {{"px", 0.55}, {"py", 0.31}});
            break;
        case ManifoldKind::sphere:
            b.primary = "height";
            b.catalog["height"] = make_spec(m, "height", {});
            b.catalog["height.a"] =
                make_spec(m, "height", {{"ux", 0.31}, {"uy", -0.22}, {"uz", 0.92}});
            b.catalog["quad.a"] = make_spec(
                m, "quadratic", {{"rx", 0.40}, {"ry", 0.30}, {"rz", 0.20}});
            b.catalog["quad.b"] = make_spec(m, "quadratic",
                                            {{"a", -3.5}, {"b", 0.5}, {"c", 3.8},
                                             {"rx", -0.30}, {"ry", 0.55}, {"rz", -0.15}});
            break;
        case ManifoldKind::rp2:
            b.primary = "quad";
            b.catalog["quad"] = make_spec(m, "quadratic", {});
            b.catalog["quad.a"] = make_spec(
                m, "quadratic", {{"rx", 0.40}, {"ry", 0.30}, {"rz", 0.20}});
            b.catalog["quad.b"] = make_spec(m, "quadratic",
                                            {{"a", -3.5}, {"b", 0.5}, {"c", 3.8},
                                             {"rx", -0.30}, {"ry", 0.55}, {"rz", -0.15}});
            break;
    }
    return b;
}

Backend parse_backend_config(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::string manifold_s, function_s;
    std::map<std::string, double> params;
    std::map<std::string, double> tols;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string s = line.substr(b, e - b + 1);
        auto eq = s.find('=');
        if (eq == std::string::npos) throw parse_error("expected key=value", lineno);
        std::string key = s.substr(0, eq);
        std::string val = s.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        auto vb = val.find_first_not_of(" \t");
        val = vb == std::string::npos ? "" : val.substr(vb);
        if (key == "manifold") {
            manifold_s = val;
        } else if (key == "function") {
            function_s = val;
        } else if (key.rfind("param.", 0) == 0) {
            params[key.substr(6)] = std::stod(val);
        } else if (key.rfind("tol.", 0) == 0) {
            tols[key.substr(4)] = std::stod(val);
        } else {
            throw parse_error("unknown config key: " + key, lineno);
        }
    }
    if (manifold_s.empty()) throw domain_error("config missing manifold=");
    Backend b = default_backend(manifold_from_string(manifold_s));
    if (!function_s.empty()) b.primary = function_s;
    if (!b.catalog.count(b.primary)) throw domain_error("unknown catalog key: " + b.primary);
    // param.* rewrites the selected entry
    for (const auto& [k, v] : params) {
        auto& sp = b.catalog[b.primary];
        if (!sp.params.count(k))
            throw domain_error("unknown parameter " + k + " for " + sp.kind);
        sp.params[k] = v;
    }
    for (const auto& [k, v] : tols) {
        Tolerances& t = b.tol;
        if (k == "h") t.h = v;
        else if (k == "eps_limit") t.eps_limit = v;
        else if (k == "t_max") t.t_max = v;
        else if (k == "grid") t.grid = static_cast<int>(v);
        else if (k == "dedup_crit") t.dedup_crit = v;
        else if (k == "hess_eig") t.hess_eig = v;
        else if (k == "grad_zero") t.grad_zero = v;
        else if (k == "sweep") t.sweep = static_cast<int>(v);
        else if (k == "newton_tol") t.newton_tol = v;
        else if (k == "newton_maxiter") t.newton_maxiter = static_cast<int>(v);
        else if (k == "dedup_sol") t.dedup_sol = v;
        else if (k == "seed_grid") t.seed_grid = static_cast<int>(v);
        else throw domain_error("unknown tolerance: " + k);
    }
    return b;
}

Backend load_backend_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw domain_error("cannot open file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_backend_config(ss.str());
}

}  // namespace graphflow
