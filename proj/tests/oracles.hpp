#pragma once

// Independent reference computations for the test suite. Everything here
// derives expected values by closed forms or tiny combinatorial
// enumerations, deliberately not calling into the library under test.

#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

namespace oracle {

using vec3 = std::array<double, 3>;
using mat3 = std::array<std::array<double, 3>, 3>;

inline double dot(const vec3& a, const vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline vec3 normalize(const vec3& a) {
    double n = std::sqrt(dot(a, a));
    return {a[0] / n, a[1] / n, a[2] / n};
}
inline vec3 mat_vec(const mat3& m, const vec3& v) {
    vec3 r{};
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) r[i] += m[i][j] * v[j];
    return r;
}
inline mat3 mul(const mat3& a, const mat3& b) {
    mat3 r{};
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++)
            for (int k = 0; k < 3; k++) r[i][j] += a[i][k] * b[k][j];
    return r;
}
inline mat3 transpose(const mat3& a) {
    mat3 r{};
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++) r[i][j] = a[j][i];
    return r;
}

// Rz(rz) Ry(ry) Rx(rx), the convention the quadratic catalog family is
// defined with (part of the input data, not of the implementation)
inline mat3 rotation_zyx(double rx, double ry, double rz) {
    double cx = std::cos(rx), sx = std::sin(rx);
    double cy = std::cos(ry), sy = std::sin(ry);
    double cz = std::cos(rz), sz = std::sin(rz);
    return {{{cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx},
             {sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx},
             {-sy, cy * sx, cy * cx}}};
}

// cyclic Jacobi for symmetric 3x3; returns eigenvalues ascending and the
// matching orthonormal eigenvectors as columns of V
inline void jacobi_eig3(mat3 a, std::array<double, 3>& lam, mat3& V) {
    V = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 64; sweep++) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; p++)
            for (int q = p + 1; q < 3; q++) {
                if (std::abs(a[p][q]) < 1e-18) continue;
                double theta = 0.5 * std::atan2(2 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(theta), s = std::sin(theta);
                mat3 r = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
                r[p][p] = c;
                r[q][q] = c;
                r[p][q] = s;
                r[q][p] = -s;
                a = mul(mul(transpose(r), a), r);
                V = mul(V, r);
            }
    }
    std::array<int, 3> ord{0, 1, 2};
    for (int i = 0; i < 3; i++)
        for (int j = i + 1; j < 3; j++)
            if (a[ord[j]][ord[j]] < a[ord[i]][ord[i]]) std::swap(ord[i], ord[j]);
    mat3 W{};
    for (int i = 0; i < 3; i++) {
        lam[i] = a[ord[i]][ord[i]];
        for (int r = 0; r < 3; r++) W[r][i] = V[r][ord[i]];
    }
    V = W;
}

// f(A) for symmetric A via eigendecomposition
inline mat3 sym_apply(const mat3& a, double (*f)(double)) {
    std::array<double, 3> lam;
    mat3 V;
    jacobi_eig3(a, lam, V);
    mat3 D{};
    for (int i = 0; i < 3; i++) D[i][i] = f(lam[i]);
    return mul(mul(V, D), transpose(V));
}
inline mat3 sym_exp(const mat3& a) { return sym_apply(a, [](double x) { return std::exp(x); }); }
inline mat3 sym_sqrt(const mat3& a) { return sym_apply(a, [](double x) { return std::sqrt(x); }); }

// ---- closed-form gradient flows ------------------------------------

// 1-d factor of the separable torus family: f(x) = a cos 2pi(x-p),
// forward flow of dx/dt = -f'(x). In u = x-p coordinates the solution is
// tan(pi u(t)) = tan(pi u0) exp(4 pi^2 a t), branch-tracked on (0,1).
inline double flow_cos_1d(double a, double p, double x0, double t) {
    double u = x0 - p;
    u -= std::floor(u);
    const double eps = 1e-15;
    if (u < eps || std::abs(u - 0.5) < eps) return x0 - std::floor(x0);
    double g = std::tan(M_PI * u) * std::exp(4 * M_PI * M_PI * a * t);
    double w = std::atan(g) / M_PI;  // in (-1/2, 1/2)
    double res = (u < 0.5) ? w : w + 1.0;
    double x = res + p;
    return x - std::floor(x);
}

// separable torus point flow, coordinates mod 1
inline std::array<double, 2> flow_torus(double ax, double ay, double px, double py,
                                        std::array<double, 2> x0, double t) {
    return {flow_cos_1d(ax, px, x0[0], t), flow_cos_1d(ay, py, x0[1], t)};
}

// quadratic-form flow on the round sphere: Phi_t(x) = normalize(e^{-2Mt} x)
inline vec3 flow_quadratic_sphere(const mat3& M, const vec3& x0, double t) {
    mat3 E = sym_exp({{{-2 * t * M[0][0], -2 * t * M[0][1], -2 * t * M[0][2]},
                       {-2 * t * M[1][0], -2 * t * M[1][1], -2 * t * M[1][2]},
                       {-2 * t * M[2][0], -2 * t * M[2][1], -2 * t * M[2][2]}}});
    return normalize(mat_vec(E, x0));
}

// ---- coincidence / fixed-point counts ------------------------------

// eigenlines of the (positive-spectrum) product C·B of two SPD matrices,
// computed through the symmetric conjugate C^{1/2} B C^{1/2}
inline std::vector<vec3> positive_product_eigenlines(const mat3& B, const mat3& C) {
    mat3 Ch = sym_sqrt(C);
    mat3 S = mul(mul(Ch, B), Ch);
    std::array<double, 3> lam;
    mat3 V;
    jacobi_eig3(S, lam, V);
    std::vector<vec3> lines;
    for (int i = 0; i < 3; i++) {
        vec3 w{V[0][i], V[1][i], V[2][i]};
        lines.push_back(normalize(mat_vec(Ch, w)));
    }
    return lines;
}

// points x on S^2 with normalize(e^{-2 M1 l1} x) == normalize(e^{-2 M2 l2} x)
inline std::vector<vec3> sphere_coincidences(const mat3& M1, double l1, const mat3& M2, double l2) {
    auto scaled = [](const mat3& M, double s) {
        mat3 r;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) r[i][j] = s * M[i][j];
        return r;
    };
    mat3 B = sym_exp(scaled(M1, -2 * l1));
    mat3 C = sym_exp(scaled(M2, 2 * l2));
    std::vector<vec3> lines = positive_product_eigenlines(B, C);
    std::vector<vec3> pts;
    for (const auto& v : lines) {
        pts.push_back(v);
        pts.push_back({-v[0], -v[1], -v[2]});
    }
    return pts;
}

// fixed points of the composed forward flow Phi2^{l2} after Phi1^{l1}
inline std::vector<vec3> sphere_composed_fixed_points(const mat3& M1, double l1, const mat3& M2,
                                                      double l2) {
    auto scaled = [](const mat3& M, double s) {
        mat3 r;
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++) r[i][j] = s * M[i][j];
        return r;
    };
    mat3 B = sym_exp(scaled(M1, -2 * l1));
    mat3 C = sym_exp(scaled(M2, -2 * l2));
    std::vector<vec3> lines = positive_product_eigenlines(B, C);
    std::vector<vec3> pts;
    for (const auto& v : lines) {
        pts.push_back(v);
        pts.push_back({-v[0], -v[1], -v[2]});
    }
    return pts;
}

// canonical sign representative for projective points
inline vec3 rp2_rep(vec3 v) {
    for (int i = 0; i < 3; i++) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) return {-v[0], -v[1], -v[2]};
            return v;
        }
    }
    return v;
}

// circle-map coincidence count by a fine sweep: zeros of
// wrap(phi1(x) - phi2(x)) over x in [0,1)
inline int circle_coincidence_count(double a1, double p1, double t1, double a2, double p2,
                                    double t2, int grid = 8192) {
    auto g = [&](double x) {
        double d = flow_cos_1d(a1, p1, x, t1) - flow_cos_1d(a2, p2, x, t2);
        d -= std::floor(d);
        if (d > 0.5) d -= 1.0;
        return d;
    };
    int count = 0;
    double prev = g(0.0);
    for (int i = 1; i <= grid; i++) {
        double cur = g(static_cast<double>(i) / grid);
        if (prev != 0 && cur != 0 && (prev > 0) != (cur > 0) && std::abs(prev) < 0.25 &&
            std::abs(cur) < 0.25)
            count++;
        prev = cur;
    }
    return count;
}

// torus coincidence count for separable families = product of the two
// 1-d counts
inline int torus_coincidence_count(std::array<double, 4> f1,  // ax, ay, px, py
                                   double l1, std::array<double, 4> f2, double l2) {
    int nx = circle_coincidence_count(f1[0], f1[2], l1, f2[0], f2[2], l2);
    int ny = circle_coincidence_count(f1[1], f1[3], l1, f2[1], f2[3], l2);
    return nx * ny;
}

// fixed points of the composed flow on the torus: coincidence of the
// composite with the identity, axis by axis
inline int circle_composed_fixed_count(double a1, double p1, double t1, double a2, double p2,
                                       double t2, int grid = 8192) {
    auto g = [&](double x) {
        double y = flow_cos_1d(a2, p2, flow_cos_1d(a1, p1, x, t1), t2);
        double d = y - x;
        d -= std::floor(d);
        if (d > 0.5) d -= 1.0;
        return d;
    };
    int count = 0;
    double prev = g(0.0);
    for (int i = 1; i <= grid; i++) {
        double cur = g(static_cast<double>(i) / grid);
        if (prev != 0 && cur != 0 && (prev > 0) != (cur > 0) && std::abs(prev) < 0.25 &&
            std::abs(cur) < 0.25)
            count++;
        prev = cur;
    }
    return count;
}

// ---- simplicial torus ring ------------------------------------------

// Delta-complex torus: one vertex, edges a,b,c, triangles U (01=a, 12=b,
// 02=c) and L (01=b, 12=a, 02=c). Degree-1 cocycles are the phi with
// phi(a)+phi(b)+phi(c)=0; cup product (phi u psi)(T) = phi(01) psi(12).
struct TorusRing {
    // H^1 basis alpha=(1,0,1), beta=(0,1,1) on (a,b,c)
    std::array<std::array<int, 3>, 2> h1{{{1, 0, 1}, {0, 1, 1}}};

    static int cup_eval(const std::array<int, 3>& phi, const std::array<int, 3>& psi) {
        int onU = phi[0] * psi[1];  // phi(a) psi(b)
        int onL = phi[1] * psi[0];  // phi(b) psi(a)
        return (onU + onL) % 2;     // paired with [U + L]
    }

    // mod-2 intersection pairing of the two degree-1 generators
    std::array<std::array<int, 2>, 2> pairing() const {
        std::array<std::array<int, 2>, 2> P{};
        for (int i = 0; i < 2; i++)
            for (int j = 0; j < 2; j++) P[i][j] = cup_eval(h1[i], h1[j]);
        return P;
    }

    int h1_rank() const {
        // kernel of delta^1 on 3 edge-cochains: phi(a)+phi(b)+phi(c)=0 for
        // both triangles, one independent condition
        int dim = 0;
        for (int mask = 0; mask < 8; mask++) {
            int pa = mask & 1, pb = (mask >> 1) & 1, pc = (mask >> 2) & 1;
            if ((pa + pb + pc) % 2 == 0) dim++;
        }
        // dim counts the kernel's 4 elements = rank 2 over F2
        return dim == 4 ? 2 : -1;
    }
};

// Expected mod-2 intersection table on an index-typed Morse basis, keyed
// by (in1 type, in2 type) -> out type. Types: "T" (index 2), "V"/"H"
// (index 1, by unstable direction), "pt" (index 0). Derived from the
// simplicial ring with V->alpha, H->beta (the opposite matching gives the
// same table because the pairing is symmetric with zero diagonal).
inline std::map<std::pair<std::string, std::string>, std::map<std::string, int>>
torus_intersection_table() {
    TorusRing ring;
    auto P = ring.pairing();
    std::map<std::pair<std::string, std::string>, std::map<std::string, int>> t;
    std::vector<std::string> one{"V", "H"};
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++) t[{one[i], one[j]}]["pt"] = P[i][j];
    for (const auto& x : {std::string("T"), std::string("V"), std::string("H"), std::string("pt")})
        t[{"T", x}][x] = 1;  // unit, cup with the degree-0 class
    for (const auto& x : {std::string("V"), std::string("H"), std::string("pt")})
        t[{x, "T"}][x] = 1;
    t[{"T", "T"}]["T"] = 1;
    return t;
}

// ---- misc -----------------------------------------------------------

inline int rank_mod2(std::vector<std::vector<int>> rows, int ncols) {
    int rank = 0;
    for (int col = 0; col < ncols && rank < static_cast<int>(rows.size()); col++) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); r++)
            if (rows[r][col] % 2) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < static_cast<int>(rows.size()); r++)
            if (r != rank && rows[r][col] % 2)
                for (int c = col; c < ncols; c++) rows[r][c] = (rows[r][c] + rows[rank][c]) % 2;
        rank++;
    }
    return rank;
}

}  // namespace oracle
