#include "graphflow/morse.hpp"

#include "graphflow/graph.hpp"
#include "graphflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace graphflow {

namespace {

// symmetric 2x2 eigendecomposition, eigenvalues ascending
void eig2(const std::array<double, 4>& H, std::array<double, 2>& lam, V2& v1, V2& v2) {
    double a = H[0], b = H[1], c = H[3];
    double tr = a + c;
    double disc = std::sqrt((a - c) * (a - c) + 4 * b * b);
    lam[0] = 0.5 * (tr - disc);
    lam[1] = 0.5 * (tr + disc);
    auto evec = [&](double l) -> V2 {
        V2 u{b, l - a}, w{l - c, b};
        V2 v = (u[0] * u[0] + u[1] * u[1] >= w[0] * w[0] + w[1] * w[1]) ? u : w;
        double n = norm2(v);
        if (n < 1e-14) return {1, 0};
        return {v[0] / n, v[1] / n};
    };
    v1 = evec(lam[0]);
    v2 = evec(lam[1]);
}

P3 rk4_step(const Manifold& m, const CompiledFunction& fn, const P3& x, double h, double sign) {
    auto vel = [&](const P3& p) { return scale3(fn.grad(p), -sign); };
    P3 k1 = vel(x);
    P3 k2 = vel(m.project(add3(x, scale3(k1, h / 2))));
    P3 k3 = vel(m.project(add3(x, scale3(k2, h / 2))));
    P3 k4 = vel(m.project(add3(x, scale3(k3, h))));
    P3 incr = add3(add3(k1, scale3(k2, 2)), add3(scale3(k3, 2), k4));
    return m.project(add3(x, scale3(incr, h / 6)));
}

struct Found {
    P3 loc;
    double value;
    int index;
    std::array<double, 4> hess;
    std::array<P3, 2> frame;
    std::array<double, 2> eigs;
    V2 vs, vu;
};

}  // namespace

MorseBackend make_morse_backend(const Backend& b, const std::string& key) {
    MorseBackend mb;
    mb.manifold = b.manifold;
    mb.fn = compile(b.manifold, b.spec(key));
    mb.tol = b.tol;
    return mb;
}

int manifold_euler_characteristic(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::torus: return 0;
        case ManifoldKind::sphere: return 2;
        default: return 1;
    }
}

std::vector<CriticalPoint> find_critical_points(const MorseBackend& b) {
    const Manifold& m = b.manifold;
    const Tolerances& tol = b.tol;
    std::vector<Found> found;
    for (const P3& seed : m.seed_points(tol.grid)) {
        P3 x = seed;
        bool ok = false;
        for (int it = 0; it < 60; it++) {
            auto frame = m.tangent_basis(x);
            P3 g = b.fn.grad(x);
            V2 gc{dot3(g, frame[0]), dot3(g, frame[1])};
            if (norm2(gc) < tol.grad_zero) {
                ok = true;
                break;
            }
            auto H = b.fn.hess_chart(x, frame);
            double det = H[0] * H[3] - H[1] * H[2];
            if (std::abs(det) < 1e-14) break;  // seed sits on a degenerate ridge
            V2 s{-(H[3] * gc[0] - H[1] * gc[1]) / det, -(-H[2] * gc[0] + H[0] * gc[1]) / det};
            double n = norm2(s);
            if (n > 0.25) s = {s[0] * 0.25 / n, s[1] * 0.25 / n};  // trust region
            x = m.retract(x, s);
            if (!std::isfinite(x[0])) break;
        }
        if (!ok) continue;
        x = m.canonicalize(x);
        bool dup = false;
        for (const auto& f : found)
            if (m.dist(f.loc, x) < tol.dedup_crit) {
                dup = true;
                break;
            }
        if (dup) continue;
        Found f;
        f.loc = x;
        f.value = b.fn.f(x);
        f.frame = m.tangent_basis(x);
        f.hess = b.fn.hess_chart(x, f.frame);
        V2 v1, v2;
        eig2(f.hess, f.eigs, v1, v2);
        if (std::abs(f.eigs[0]) < tol.hess_eig || std::abs(f.eigs[1]) < tol.hess_eig)
            throw domain_error("degenerate critical point");
        f.index = (f.eigs[0] < 0 ? 1 : 0) + (f.eigs[1] < 0 ? 1 : 0);
        // for the flow: unstable along negative Hessian eigenvalues
        f.vu = f.eigs[0] < 0 ? v1 : V2{0, 0};
        f.vs = f.eigs[1] > 0 ? v2 : V2{0, 0};
        if (f.index == 1) {
            f.vu = v1;  // eigs[0] < 0 <= eigs[1]
            f.vs = v2;
        }
        found.push_back(f);
    }
    // order: by index, then by rounded location
    auto key = [](const Found& f) {
        auto r = [](double v) { return std::llround(v * 1e6); };
        return std::tuple<int, long long, long long, long long>{f.index, r(f.loc[0]), r(f.loc[1]),
                                                                r(f.loc[2])};
    };
    std::sort(found.begin(), found.end(),
              [&](const Found& a, const Found& c) { return key(a) < key(c); });
    int alt = 0;
    for (const auto& f : found) alt += (f.index % 2 == 0) ? 1 : -1;
    if (alt != manifold_euler_characteristic(m.kind()))
        throw invariant_error("critical point inventory inconsistent with chi(M)");
    std::vector<CriticalPoint> out;
    std::map<int, int> ordinal;
    for (const auto& f : found) {
        CriticalPoint c;
        c.index = f.index;
        c.location = f.loc;
        c.value = f.value;
        c.hess = f.hess;
        c.frame = f.frame;
        c.eigs = f.eigs;
        c.stable_dir = f.vs;
        c.unstable_dir = f.vu;
        c.id = "i" + std::to_string(f.index) + "." + std::to_string(ordinal[f.index]++);
        out.push_back(c);
    }
    return out;
}

Trajectory integrate_trajectory(const MorseBackend& b, const P3& x0, double T, bool forward) {
    if (T < 0) throw domain_error("negative duration");
    Trajectory tr;
    tr.forward = forward;
    double sign = forward ? 1.0 : -1.0;
    P3 x = b.manifold.project(x0);
    tr.samples.push_back({0.0, x});
    double h = b.tol.h;
    long long n = std::llround(std::ceil(T / h - 1e-12));
    for (long long i = 0; i < n; i++) {
        double step = std::min(h, T - i * h);
        x = rk4_step(b.manifold, b.fn, x, step, sign);
        if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2]))
            throw domain_error("non-finite integration state");
        tr.samples.push_back({std::min((i + 1) * h, T), x});
    }
    return tr;
}

P3 flow_point(const MorseBackend& b, const P3& x0, double t) {
    double sign = t >= 0 ? 1.0 : -1.0;
    double T = std::abs(t);
    double h = b.tol.h;
    P3 x = b.manifold.project(x0);
    long long n = std::llround(std::ceil(T / h - 1e-12));
    for (long long i = 0; i < n; i++) {
        double step = std::min(h, T - i * h);
        x = rk4_step(b.manifold, b.fn, x, step, sign);
    }
    if (!std::isfinite(x[0]) || !std::isfinite(x[1]) || !std::isfinite(x[2]))
        throw domain_error("non-finite integration state");
    return x;
}

std::string limit_critical_point(const MorseBackend& b, const std::vector<CriticalPoint>& crits,
                                 const P3& x0, bool forward) {
    const Manifold& m = b.manifold;
    double sign = forward ? 1.0 : -1.0;
    P3 x = m.project(x0);
    double h = b.tol.h;
    long long n = std::llround(b.tol.t_max / h);
    for (long long i = 0; i <= n; i++) {
        for (const auto& c : crits)
            if (m.dist(x, c.location) < b.tol.eps_limit) return c.id;
        if (i == n) break;
        x = rk4_step(m, b.fn, x, h, sign);
    }
    throw domain_error("no convergence by T_max");
}

const CriticalPoint& MorseComplex::point(const std::string& id) const {
    for (const auto& p : points)
        if (p.id == id) return p;
    throw domain_error("unknown critical point: " + id);
}

std::vector<const CriticalPoint*> MorseComplex::grade(int index) const {
    std::vector<const CriticalPoint*> out;
    for (const auto& p : points)
        if (p.index == index) out.push_back(&p);
    return out;
}

int MorseComplex::count_mod2(const std::string& upper, const std::string& lower) const {
    auto it = counts.find({upper, lower});
    return it == counts.end() ? 0 : it->second % 2;
}

namespace {

// forward-flow limit among given targets, tracking nothing else
int classify_limit(const MorseBackend& b, P3 x, const std::vector<const CriticalPoint*>& targets) {
    const Manifold& m = b.manifold;
    double h = b.tol.h;
    long long n = std::llround(b.tol.t_max / h);
    for (long long i = 0; i <= n; i++) {
        for (size_t k = 0; k < targets.size(); k++)
            if (m.dist(x, targets[k]->location) < b.tol.eps_limit) return static_cast<int>(k);
        if (i == n) break;
        x = rk4_step(m, b.fn, x, h, 1.0);
    }
    return -1;
}

// which critical point a trajectory lands on, together with the deck
// transformation of the landing lift: the lattice offset on the torus
// cover, the sign of the lift on the sphere double cover of rp2. Two
// basins that agree downstairs but differ by a deck move are separated
// by a stable curve upstairs, and that is what the sweep must see.
struct BasinKey {
    int crit = -1;
    long long da = 0, db = 0;
    bool operator==(const BasinKey&) const = default;
};

double wrap_centered(double d) { return d - std::floor(d + 0.5); }

BasinKey classify_limit_deck(const MorseBackend& b, P3 u,
                             const std::vector<const CriticalPoint*>& targets,
                             std::vector<double>* approach = nullptr) {
    const Manifold& m = b.manifold;
    P3 x = m.project(u);  // u stays unwrapped; x lives on the chart
    double h = b.tol.h;
    long long n = std::llround(b.tol.t_max / h);
    if (approach) approach->assign(targets.size(), 1e100);
    for (long long i = 0; i <= n; i++) {
        for (size_t k = 0; k < targets.size(); k++) {
            double d = m.dist(x, targets[k]->location);
            if (approach) (*approach)[k] = std::min((*approach)[k], d);
            if (d >= b.tol.eps_limit) continue;
            BasinKey key;
            key.crit = static_cast<int>(k);
            if (m.kind() == ManifoldKind::torus) {
                key.da = std::llround(u[0] - targets[k]->location[0]);
                key.db = std::llround(u[1] - targets[k]->location[1]);
            } else if (m.kind() == ManifoldKind::rp2) {
                key.da = dot3(x, targets[k]->location) > 0 ? 1 : -1;
            }
            return key;
        }
        if (i == n) break;
        P3 nx = rk4_step(m, b.fn, x, h, 1.0);
        if (m.kind() == ManifoldKind::torus)
            for (int c = 0; c < 2; c++) u[c] += wrap_centered(nx[c] - x[c]);
        x = nx;
    }
    return {};
}

}  // namespace

MorseComplex morse_complex(const MorseBackend& b) {
    MorseComplex cx;
    cx.points = find_critical_points(b);
    const Manifold& m = b.manifold;
    auto mins = cx.grade(0);
    auto saddles = cx.grade(1);
    auto maxes = cx.grade(2);

    // saddle -> min: the unstable manifold is exactly two trajectories
    for (const auto* s : saddles) {
        for (double dir : {1.0, -1.0}) {
            V2 off{dir * 1e-3 * s->unstable_dir[0], dir * 1e-3 * s->unstable_dir[1]};
            P3 start = m.retract(s->location, off);
            int hit = classify_limit(b, start, mins);
            if (hit < 0) throw domain_error("transversality failure; perturb parameters");
            cx.counts[{s->id, mins[hit]->id}]++;
        }
    }

    // max -> saddle: sweep the unstable circle and classify where every
    // direction lands. A basin change between neighbouring directions
    // brackets exactly one separatrix; bisecting drives the trajectory
    // into the index-1 point that owns it. A direction that parks on a
    // saddle outright is a connecting orbit itself.
    if (!saddles.empty()) {
        std::vector<const CriticalPoint*> all;
        for (const auto& p : cx.points) all.push_back(&p);
        for (const auto* top : maxes) {
            int N = b.tol.sweep;
            // build starts by hand: retract would canonicalize, and on rp2
            // that flips half the circle onto the antipodal lift
            auto frame = m.tangent_basis(top->location);
            auto start_at = [&](double th) -> P3 {
                V2 off{1e-3 * std::cos(th), 1e-3 * std::sin(th)};
                if (m.kind() == ManifoldKind::torus)
                    return {top->location[0] + off[0], top->location[1] + off[1], 0.0};
                return add3(top->location, add3(scale3(frame[0], off[0]), scale3(frame[1], off[1])));
            };
            std::vector<BasinKey> basin(N);
            parallel_for(N, [&](int k) {
                basin[k] = classify_limit_deck(b, start_at(2 * M_PI * k / N), all);
            });
            auto grade_of = [&](const BasinKey& bk) { return all[bk.crit]->index; };
            for (int k = 0; k < N; k++) {
                if (basin[k].crit < 0)
                    throw domain_error("transversality failure; perturb parameters");
                if (grade_of(basin[k]) == 1) cx.counts[{top->id, all[basin[k].crit]->id}]++;
            }
            // integrator noise keeps a shot trajectory a few 1e-4 away from
            // the saddle even when the bracket is exact, so ownership is
            // decided by closest approach, not by parking inside eps_limit
            const double attrib_radius = 0.02;
            for (int k = 0; k < N; k++) {
                const BasinKey& lo_key = basin[k];
                const BasinKey& hi_key = basin[(k + 1) % N];
                if (lo_key == hi_key) continue;
                if (grade_of(lo_key) == 1 || grade_of(hi_key) == 1) continue;
                double lo = 2 * M_PI * k / N, hi = 2 * M_PI * (k + 1) / N;
                int hit = -1;
                std::vector<double> approach;
                for (int it = 0; it < 80 && hit < 0; it++) {
                    BasinKey c = classify_limit_deck(b, start_at(0.5 * (lo + hi)), all, &approach);
                    if (c.crit < 0) break;
                    for (size_t j = 0; j < all.size(); j++)
                        if (all[j]->index == 1 && approach[j] < attrib_radius) hit = static_cast<int>(j);
                    if (hit >= 0) break;
                    if (c == lo_key)
                        lo = 0.5 * (lo + hi);
                    else
                        hi = 0.5 * (lo + hi);
                }
                if (hit < 0) throw domain_error("transversality failure; perturb parameters");
                cx.counts[{top->id, all[hit]->id}]++;
            }
        }
    }

    // dd = 0 over F2
    for (const auto* top : maxes)
        for (const auto* mn : mins) {
            int acc = 0;
            for (const auto* s : saddles)
                acc += cx.count_mod2(top->id, s->id) * cx.count_mod2(s->id, mn->id);
            if (acc % 2 != 0) throw domain_error("transversality failure; perturb parameters");
        }
    return cx;
}

namespace {

int rank_f2(std::vector<std::vector<int>> rows, int ncols) {
    int rank = 0;
    for (int col = 0; col < ncols && rank < static_cast<int>(rows.size()); col++) {
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); r++)
            if (rows[r][col]) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = 0; r < static_cast<int>(rows.size()); r++)
            if (r != rank && rows[r][col])
                for (int c = col; c < ncols; c++) rows[r][c] ^= rows[rank][c];
        rank++;
    }
    return rank;
}

}  // namespace

std::vector<int> homology_ranks(const MorseComplex& c) {
    const int d = 2;
    std::vector<std::vector<const CriticalPoint*>> grades;
    for (int k = 0; k <= d; k++) grades.push_back(c.grade(k));
    std::vector<int> rank_bnd(d + 2, 0);  // rank of d_k: C_k -> C_{k-1}
    for (int k = 1; k <= d; k++) {
        const auto& upper = grades[k];
        const auto& lower = grades[k - 1];
        if (upper.empty() || lower.empty()) continue;
        std::vector<std::vector<int>> mat(upper.size(), std::vector<int>(lower.size(), 0));
        for (size_t i = 0; i < upper.size(); i++)
            for (size_t j = 0; j < lower.size(); j++)
                mat[i][j] = c.count_mod2(upper[i]->id, lower[j]->id);
        rank_bnd[k] = rank_f2(std::move(mat), static_cast<int>(lower.size()));
    }
    std::vector<int> ranks;
    for (int k = 0; k <= d; k++)
        ranks.push_back(static_cast<int>(grades[k].size()) - rank_bnd[k] - rank_bnd[k + 1]);
    return ranks;
}

}  // namespace graphflow
