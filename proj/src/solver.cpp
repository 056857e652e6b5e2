#include "vih/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vih/parallel.hpp"

namespace vih::solver {

using flight::Side;
using model::kPi;

namespace {

// Threshold for swapping the divided closure residual v - N/D to its
// pre-division form v*D - N. The divided form loses its last digits when the
// prefactor D is small (the error grows like N/D^2), so the swap happens well
// before D vanishes; physical roots have |D| ~ 0.05-0.1 and are unaffected.
constexpr double kDenSwap = 1e-3;
constexpr double kLegTol = 1e-6;    ///< flight-check tolerance in validate_orbit

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Gauss elimination with partial pivoting; returns false when singular.
bool gauss_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i * n + k]) > std::abs(A[piv * n + k])) piv = i;
        if (std::abs(A[piv * n + k]) < 1e-300) return false;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A[k * n + j], A[piv * n + j]);
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = A[i * n + k] / A[k * n + k];
            for (std::size_t j = k; j < n; ++j) A[i * n + j] -= m * A[k * n + j];
            b[i] -= m * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i * n + j] * b[j];
        b[i] = s / A[i * n + i];
    }
    return true;
}

double inf_norm(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sq_norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return s;
}

/// Prefactor of the velocity closure: 2(qr - pr^2 + (1-q-p)r^3). Both residual
/// arrangements evaluate it identically so the branch choice around kDenSwap
/// never diverges between them.
double closure_prefactor(double q, double p, double r) {
    return 2 * (q * r - p * r * r + (1 - q - p) * r * r * r);
}

}  // namespace

NewtonResult newton_solve(const VectorFn& fn, std::vector<double> x0, const NewtonOptions& opt) {
    NewtonResult res;
    res.x = std::move(x0);
    const std::size_t n = res.x.size();
    std::vector<double> R = fn(res.x);
    for (int it = 0; it < opt.max_iter; ++it) {
        res.iterations = it;
        if (!all_finite(R)) return res;
        res.residual_inf = inf_norm(R);
        if (res.residual_inf < opt.tol) {
            res.converged = true;
            return res;
        }
        std::vector<double> J(n * n);
        for (std::size_t j = 0; j < n; ++j) {
            auto xp = res.x, xm = res.x;
            xp[j] += opt.fd_step;
            xm[j] -= opt.fd_step;
            const auto Rp = fn(xp), Rm = fn(xm);
            for (std::size_t i = 0; i < n; ++i)
                J[i * n + j] = (Rp[i] - Rm[i]) / (2 * opt.fd_step);
        }
        std::vector<double> dx(n);
        for (std::size_t i = 0; i < n; ++i) dx[i] = -R[i];
        if (!gauss_solve(J, dx, n)) return res;
        const double base = sq_norm(R);
        double alpha = 1.0;
        std::vector<double> xn(n), Rn;
        while (alpha > opt.min_alpha) {
            for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + alpha * dx[i];
            Rn = fn(xn);
            if (all_finite(Rn) && sq_norm(Rn) < base * (1 - 1e-4 * alpha)) break;
            alpha *= opt.backtrack;
        }
        if (alpha <= opt.min_alpha) return res;
        res.x = xn;
        R = Rn;
    }
    res.residual_inf = inf_norm(R);
    res.converged = res.residual_inf < opt.tol;
    return res;
}

std::array<double, 4> residual_2to1(const std::array<double, 4>& x, const SystemParams& sp,
                                    const Forcing& fo) {
    if (!fo.cosine) return residual_2to1_general(x, sp, fo);
    const double v = x[0], phi = x[1], q = x[2], p = x[3];
    if (q == 0.0 || p == 0.0) throw std::domain_error("residual_2to1: q or p is zero");
    const double r = sp.r, g = sp.gbar, d = sp.d;
    const double s0 = std::sin(phi), s1 = std::sin(2 * kPi * q + phi);
    const double s2 = std::sin(2 * kPi * (q + p) + phi);
    const double c0 = std::cos(phi), c1 = std::cos(2 * kPi * q + phi);
    const double c2 = std::cos(2 * kPi * (q + p) + phi);

    const double rhs_a = (2 * q * (r - 1) * g - 2 * p * g + (1 - r) / kPi * s0 + r / kPi * s1 -
                          s2 / kPi + 2 * g / (1 + r)) /
                         (1 - r + r * r);
    const double rhs_b =
        (kPi * q * g - s0 - c1 / (2 * kPi * q) + c0 / (2 * kPi * q)) / (kPi * r);
    const double rhs_c = ((1 + r) * s1 - r * s0 + 2 * kPi * q * r * g + c2 / (2 * kPi * p) -
                          c1 / (2 * kPi * p) - kPi * p * g - kPi * d / (2 * p)) /
                         (kPi * r * r);
    const double u = 1 - q - p;
    const double D = closure_prefactor(q, p, r);
    const double N = 2 * g * (q * q + p * p + u * u) +
                     (s0 / kPi) * (-2 * r * r * u + 2 * p * r - 2 * q) +
                     (s1 / kPi) * (2 * r * r * u - 2 * p * r + 2 * r * u - 2 * p) +
                     4 * g * (r * r * q * u - r * p * q - r * p * u) -
                     (2 * u * (1 + r) / kPi) * s2;
    const double res_d = std::abs(D) < kDenSwap ? v * D - N : v - N / D;
    return {v - rhs_a, v - rhs_b, v - rhs_c, res_d};
}

std::array<double, 4> residual_2to1_general(const std::array<double, 4>& x, const SystemParams& sp,
                                            const Forcing& fo) {
    const double v = x[0], phi = x[1], q = x[2], p = x[3];
    if (q == 0.0 || p == 0.0) throw std::domain_error("residual_2to1_general: q or p is zero");
    const double r = sp.r, g = sp.gbar, d = sp.d;
    const double T1 = 2 * q, T2 = 2 * p, T3 = 2 - T1 - T2;
    const double tk = 0.0, tk1 = T1, tk2 = T1 + T2;
    const double F1k = fo.F1(tk, phi), F1k1 = fo.F1(tk1, phi), F1k2 = fo.F1(tk2, phi);
    const double F2k = fo.F2(tk, phi), F2k1 = fo.F2(tk1, phi), F2k2 = fo.F2(tk2, phi);

    const double rhs_a = ((r - 1) * g * T1 - g * T2 + (1 - r) * F1k + r * F1k1 - F1k2 +
                          2 * g / (1 + r)) /
                         (1 - r + r * r);
    const double rhs_b = (F2k1 - F2k) / (r * T1) + (g * T1 - 2 * F1k) / (2 * r);
    const double rhs_c = (g * T1 + F1k1 - F1k) / r - (d + F2k2 - F2k1) / (r * r * T2) -
                         (g * T2 - 2 * F1k1) / (2 * r * r);
    const double D = closure_prefactor(q, p, r);
    const double N = g / 2 * (T1 * T1 + T2 * T2 + T3 * T3) + F1k * (-r * r * T3 + r * T2 - T1) +
                     F1k1 * (r * r * T3 - r * T2 + r * T3 - T2) + r * r * g * T1 * T3 -
                     r * g * T1 * T2 - r * g * T2 * T3 - (1 + r) * T3 * F1k2;
    const double res_d = std::abs(D) < kDenSwap ? v * D - N : v - N / D;
    return {v - rhs_a, v - rhs_b, v - rhs_c, res_d};
}

std::array<double, 3> residual_1to1(const std::array<double, 3>& x, const SystemParams& sp,
                                    const Forcing& fo) {
    const double v = x[0], phi = x[1], dt = x[2];
    const double r = sp.r, g = sp.gbar, d = sp.d;
    const double tk = 0.0, tk1 = dt, tk2 = 2.0;
    const double dt2 = 2.0 - dt;
    const double vk1 = -r * v + g * dt + fo.F1(tk1, phi) - fo.F1(tk, phi);
    const double R1 = (-r * vk1 + g * dt2 + fo.F1(tk2, phi) - fo.F1(tk1, phi)) - v;
    const double R2 = (-r * v * dt + g / 2 * dt * dt + fo.F2(tk1, phi) - fo.F2(tk, phi) -
                       fo.F1(tk, phi) * dt) -
                      (-d);
    const double R3 = (-r * vk1 * dt2 + g / 2 * dt2 * dt2 + fo.F2(tk2, phi) - fo.F2(tk1, phi) -
                       fo.F1(tk1, phi) * dt2) -
                      d;
    return {R1, R2, R3};
}

std::pair<double, double> recover_velocities(double v, double phi, double q, double p,
                                             const SystemParams& sp, const Forcing& fo) {
    const double r = sp.r, g = sp.gbar;
    const double T1 = 2 * q, T2 = 2 * p;
    const double tk = 0.0, tk1 = T1, tk2 = T1 + T2;
    const double vk1 = -r * v + g * T1 + fo.F1(tk1, phi) - fo.F1(tk, phi);
    const double vk2 = r * r * v - r * g * T1 + g * T2 + r * fo.F1(tk, phi) -
                       (1 + r) * fo.F1(tk1, phi) + fo.F1(tk2, phi);
    return {vk1, vk2};
}

namespace {

/// Checks one leg with the event-driven flight: starting from the post-impact
/// state, the next wall hit must be the scheduled one.
bool check_leg(double t0, Side side0, double v_pre0, double t1, Side side1, double v_pre1,
               const SystemParams& sp, const Forcing& fo, std::string& why) {
    flight::ImpactEvent ev0;
    ev0.t = t0;
    ev0.side = side0;
    ev0.v_pre = v_pre0;
    ev0.v_post = flight::apply_impact(v_pre0, sp.r);
    const auto st = flight::post_impact_state(ev0, sp);
    std::optional<flight::ImpactEvent> hit;
    try {
        hit = flight::next_impact(st, sp, fo, t1 + 1.0);
    } catch (const std::exception& e) {
        why = std::string("flight check failed: ") + e.what();
        return false;
    }
    if (!hit) {
        why = "no impact found on a cycle leg";
        return false;
    }
    if (hit->side != side1 || std::abs(hit->t - t1) > kLegTol ||
        std::abs(hit->v_pre - v_pre1) > kLegTol) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "leg [%g, %g] hits %s wall at t=%.6f v=%.6f instead of the scheduled impact",
                      t0, t1, hit->side == Side::Bottom ? "bottom" : "top", hit->t, hit->v_pre);
        why = buf;
        return false;
    }
    return true;
}

}  // namespace

void validate_orbit(Orbit21& orbit, const SystemParams& params, const Forcing& fo) {
    // The legs live on the orbit's own clock: t_k = 0 with phase phi_k.
    SystemParams sp = params;
    sp.phi = orbit.phi_k;
    orbit.valid = false;
    const double v = orbit.v_k, q = orbit.q, p = orbit.p;
    if (!(std::isfinite(v) && std::isfinite(q) && std::isfinite(p))) {
        orbit.diagnostics = "non-finite solution";
        return;
    }
    if (!(q > 0 && p > 0 && q + p < 1)) {
        orbit.diagnostics = "flight intervals outside (0, 1)";
        return;
    }
    if (!(v > 0 && orbit.v_k1 > 0 && orbit.v_k2 < 0)) {
        orbit.diagnostics = "wall-inconsistent impact velocity signs";
        return;
    }
    const double t1 = 2 * q, t2 = 2 * (q + p);
    std::string why;
    if (!check_leg(0.0, Side::Bottom, v, t1, Side::Bottom, orbit.v_k1, sp, fo, why) ||
        !check_leg(t1, Side::Bottom, orbit.v_k1, t2, Side::Top, orbit.v_k2, sp, fo, why) ||
        !check_leg(t2, Side::Top, orbit.v_k2, 2.0, Side::Bottom, v, sp, fo, why)) {
        orbit.diagnostics = why;
        return;
    }
    orbit.valid = true;
    orbit.diagnostics.clear();
}

void validate_orbit(Orbit11& orbit, const SystemParams& params, const Forcing& fo) {
    SystemParams sp = params;
    sp.phi = orbit.phi_k;
    orbit.valid = false;
    const double v = orbit.v_k, dt = orbit.dt_k;
    if (!(std::isfinite(v) && std::isfinite(dt))) {
        orbit.diagnostics = "non-finite solution";
        return;
    }
    if (!(dt > 0 && dt < 2)) {
        orbit.diagnostics = "flight interval outside (0, 2)";
        return;
    }
    if (!(v > 0 && orbit.v_k1 < 0)) {
        orbit.diagnostics = "wall-inconsistent impact velocity signs";
        return;
    }
    std::string why;
    if (!check_leg(0.0, Side::Bottom, v, dt, Side::Top, orbit.v_k1, sp, fo, why) ||
        !check_leg(dt, Side::Top, orbit.v_k1, 2.0, Side::Bottom, v, sp, fo, why)) {
        orbit.diagnostics = why;
        return;
    }
    orbit.valid = true;
    orbit.diagnostics.clear();
}

Orbit21 solve_2to1(const SystemParams& sp, const Forcing& fo, const std::array<double, 4>& guess) {
    model::validate(sp);
    const VectorFn fn = [&](const std::vector<double>& x) {
        const auto R = residual_2to1({x[0], x[1], x[2], x[3]}, sp, fo);
        return std::vector<double>(R.begin(), R.end());
    };
    const auto res = newton_solve(fn, {guess.begin(), guess.end()});
    Orbit21 o;
    o.residual_norm = res.residual_inf;
    if (!res.converged) {
        o.status = SolveStatus::NoConvergence;
        o.diagnostics = "no convergence after " + std::to_string(res.iterations) + " iterations";
        o.v_k = res.x[0];
        o.phi_k = model::wrap_phase(res.x[1]);
        o.q = res.x[2];
        o.p = res.x[3];
        return o;
    }
    o.v_k = res.x[0];
    o.phi_k = model::wrap_phase(res.x[1]);
    o.q = res.x[2];
    o.p = res.x[3];
    std::tie(o.v_k1, o.v_k2) = recover_velocities(o.v_k, o.phi_k, o.q, o.p, sp, fo);
    validate_orbit(o, sp, fo);
    o.status = o.valid ? SolveStatus::Converged : SolveStatus::SpuriousRoot;
    return o;
}

Orbit11 solve_1to1(const SystemParams& sp, const Forcing& fo, const std::array<double, 3>& guess) {
    model::validate(sp);
    const VectorFn fn = [&](const std::vector<double>& x) {
        const auto R = residual_1to1({x[0], x[1], x[2]}, sp, fo);
        return std::vector<double>(R.begin(), R.end());
    };
    const auto res = newton_solve(fn, {guess.begin(), guess.end()});
    Orbit11 o;
    o.residual_norm = res.residual_inf;
    if (!res.converged) {
        o.status = SolveStatus::NoConvergence;
        o.diagnostics = "no convergence after " + std::to_string(res.iterations) + " iterations";
        o.v_k = res.x[0];
        o.phi_k = model::wrap_phase(res.x[1]);
        o.dt_k = res.x[2];
        return o;
    }
    o.v_k = res.x[0];
    o.phi_k = model::wrap_phase(res.x[1]);
    o.dt_k = res.x[2];
    o.v_k1 = -sp.r * o.v_k + sp.gbar * o.dt_k + fo.F1(o.dt_k, o.phi_k) - fo.F1(0.0, o.phi_k);
    validate_orbit(o, sp, fo);
    o.status = o.valid ? SolveStatus::Converged : SolveStatus::SpuriousRoot;
    return o;
}

std::vector<std::array<double, 4>> seed_grid_2to1(const SystemParams& sp, const Forcing& fo) {
    std::vector<std::array<double, 4>> seeds;
    for (int i = 0; i < 8; ++i) {
        const double phi = i * kPi / 4;
        for (double q : {0.05, 0.15, 0.25})
            for (double p : {0.3, 0.45, 0.6}) {
                const auto R = residual_2to1({0.0, phi, q, p}, sp, fo);
                seeds.push_back({-R[0], phi, q, p});
            }
    }
    return seeds;
}

std::vector<std::array<double, 3>> seed_grid_1to1() {
    std::vector<std::array<double, 3>> seeds;
    for (int i = 0; i < 8; ++i) {
        const double phi = i * kPi / 4;
        for (double dt : {0.6, 0.8, 1.0, 1.2, 1.4}) seeds.push_back({0.5, phi, dt});
    }
    return seeds;
}

namespace {

/// Deterministic duplicate-root filter: 1e-6 rounding on the solution tuple.
template <typename Orbit, typename Key>
std::vector<Orbit> dedup_sorted(std::vector<Orbit> all, const Key& key) {
    std::vector<Orbit> out;
    std::set<std::array<long long, 4>> seen;
    for (auto& o : all) {
        if (o.status == SolveStatus::NoConvergence) continue;
        if (seen.insert(key(o)).second) out.push_back(std::move(o));
    }
    std::stable_sort(out.begin(), out.end(), [](const Orbit& a, const Orbit& b) {
        if (a.valid != b.valid) return a.valid;
        return a.v_k < b.v_k;
    });
    return out;
}

long long keyr(double x) { return std::llround(x * 1e6); }

}  // namespace

std::vector<Orbit21> solve_2to1_multistart(const SystemParams& sp, const Forcing& fo, int jobs) {
    const auto seeds = seed_grid_2to1(sp, fo);
    std::vector<Orbit21> all(seeds.size());
    par::parallel_for(seeds.size(), jobs,
                      [&](std::size_t i) { all[i] = solve_2to1(sp, fo, seeds[i]); });
    return dedup_sorted(std::move(all), [](const Orbit21& o) {
        return std::array<long long, 4>{keyr(o.v_k), keyr(o.phi_k), keyr(o.q), keyr(o.p)};
    });
}

std::vector<Orbit11> solve_1to1_multistart(const SystemParams& sp, const Forcing& fo, int jobs) {
    const auto seeds = seed_grid_1to1();
    std::vector<Orbit11> all(seeds.size());
    par::parallel_for(seeds.size(), jobs,
                      [&](std::size_t i) { all[i] = solve_1to1(sp, fo, seeds[i]); });
    return dedup_sorted(std::move(all), [](const Orbit11& o) {
        return std::array<long long, 4>{keyr(o.v_k), keyr(o.phi_k), keyr(o.dt_k), 0};
    });
}

std::string to_json(const Orbit21& o, const SystemParams& sp) {
    nlohmann::json j;
    j["type"] = "2:1";
    j["d"] = sp.d;
    j["r"] = sp.r;
    j["gbar"] = sp.gbar;
    j["v_k"] = o.v_k;
    j["phi_k"] = o.phi_k;
    j["q"] = o.q;
    j["p"] = o.p;
    j["v_k1"] = o.v_k1;
    j["v_k2"] = o.v_k2;
    j["residual"] = o.residual_norm;
    j["valid"] = o.valid;
    if (!o.diagnostics.empty()) j["diagnostics"] = o.diagnostics;
    return j.dump(2);
}

std::string to_json(const Orbit11& o, const SystemParams& sp) {
    nlohmann::json j;
    j["type"] = "1:1";
    j["d"] = sp.d;
    j["r"] = sp.r;
    j["gbar"] = sp.gbar;
    j["v_k"] = o.v_k;
    j["phi_k"] = o.phi_k;
    j["dt_k"] = o.dt_k;
    j["v_k1"] = o.v_k1;
    j["residual"] = o.residual_norm;
    j["valid"] = o.valid;
    if (!o.diagnostics.empty()) j["diagnostics"] = o.diagnostics;
    return j.dump(2);
}

}  // namespace vih::solver
