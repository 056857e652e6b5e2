#include "vih/flight.hpp"

#include <cmath>
#include <stdexcept>

namespace vih::flight {

namespace {

struct FlightCtx {
    double t0, Z0, w0, phi;
    const SystemParams* p;
    const Forcing* fo;

    [[nodiscard]] double Z(double t) const {
        const double dt = t - t0;
        return Z0 + w0 * dt + 0.5 * p->gbar * dt * dt + fo->F2(t, phi) - fo->F2(t0, phi) -
               fo->F1(t0, phi) * dt;
    }
    [[nodiscard]] double Zd(double t) const {
        return w0 + p->gbar * (t - t0) + fo->F1(t, phi) - fo->F1(t0, phi);
    }
};

/// Polishes a bracketed root of Z(t)-target to kPosTol.
double polish_root(const FlightCtx& c, double target, double lo, double hi) {
    auto g = [&](double t) { return c.Z(t) - target; };
    double glo = g(lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) < kPosTol && hi - lo < 1e-9) return mid;
        if (glo * gm <= 0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
        if (hi - lo < 1e-9) {
            double t = 0.5 * (lo + hi);
            for (int k = 0; k < 8; ++k) {
                const double gt = g(t);
                if (std::abs(gt) < kPosTol) return t;
                const double dg = c.Zd(t);
                if (dg == 0.0) break;
                const double step = gt / dg;
                const double tn = t - step;
                if (tn < lo || tn > hi) break;
                t = tn;
            }
            return t;
        }
    }
    return 0.5 * (lo + hi);
}

/// Root of Zd on [a, b] assuming a sign change.
double velocity_root(const FlightCtx& c, double a, double b) {
    double fa = c.Zd(a);
    for (int i = 0; i < 80 && b - a > 1e-15; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = c.Zd(m);
        if (fa * fm <= 0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

ImpactEvent make_event(const FlightCtx& c, double t, Side side, const SystemParams& p) {
    ImpactEvent ev;
    ev.t = t;
    ev.side = side;
    ev.v_pre = c.Zd(t);
    ev.v_post = apply_impact(ev.v_pre, p.r);
    ev.phase = model::wrap_phase(model::kPi * t + c.phi);
    ev.grazing = std::abs(ev.v_pre) < kGrazeVel;
    return ev;
}

}  // namespace

double FlightSegment::Z(double t) const {
    FlightCtx c{start.t, start.Z, start.w, params.phi, &params, forcing};
    return c.Z(t);
}

double FlightSegment::Zdot(double t) const {
    FlightCtx c{start.t, start.Z, start.w, params.phi, &params, forcing};
    return c.Zd(t);
}

FreeState post_impact_state(const ImpactEvent& ev, const SystemParams& p) {
    return FreeState{ev.t, wall_z(ev.side, p.d), ev.v_post};
}

std::pair<double, double> flight_eval(const FreeState& from, double t, const SystemParams& p,
                                      const Forcing& fo) {
    FlightCtx c{from.t, from.Z, from.w, p.phi, &p, &fo};
    return {c.Z(t), c.Zd(t)};
}

std::pair<double, double> flight_eval(const ImpactEvent& prev, double t, const SystemParams& p,
                                      const Forcing& fo) {
    if (t < prev.t) throw std::domain_error("flight_eval: t precedes the segment start");
    return flight_eval(post_impact_state(prev, p), t, p, fo);
}

std::optional<ImpactEvent> next_impact(const FreeState& from, const SystemParams& p,
                                       const Forcing& fo, double t_max) {
    if (t_max <= from.t) throw std::domain_error("next_impact: t_max must exceed the start time");
    const FlightCtx c{from.t, from.Z, from.w, p.phi, &p, &fo};
    const double half = p.d / 2;

    double t = from.t + kRestartEps;
    {
        const double z = c.Z(t);
        // Post-grazing push-in: the state already sits beyond a wall.
        if (z - half > kPosTol) return make_event(c, t, Side::Bottom, p);
        if (z + half < -kPosTol) return make_event(c, t, Side::Top, p);
    }

    while (t < t_max) {
        const double t2 = std::min(t + kScanStep, t_max);
        const double z1 = c.Z(t);
        const double z2 = c.Z(t2);
        const double b1 = z1 - half, b2 = z2 - half;
        const double u1 = z1 + half, u2 = z2 + half;

        struct Cand {
            Side side;
            double lo, hi;
        };
        Cand cands[8];
        int nc = 0;
        if (b1 * b2 < 0) cands[nc++] = {Side::Bottom, t, t2};
        if (u1 * u2 < 0) cands[nc++] = {Side::Top, t, t2};

        // Interior extrema located from velocity sign changes on an h/8 grid
        // catch excursions that cross a wall and return within one step.
        const double sub = (t2 - t) / 8;
        for (int i = 0; i < 8 && sub > 0; ++i) {
            const double a = t + i * sub;
            const double b = a + sub;
            if (c.Zd(a) * c.Zd(b) >= 0) continue;
            const double tm = velocity_root(c, a, b);
            const double zm = c.Z(tm);
            if (nc <= 6 && zm - half > kPosTol && b1 < 0) cands[nc++] = {Side::Bottom, t, tm};
            if (nc <= 6 && zm + half < -kPosTol && u1 > 0) cands[nc++] = {Side::Top, t, tm};
            if (nc <= 6 && std::abs(zm - half) <= kPosTol && std::abs(c.Zd(tm)) < kGrazeVel)
                cands[nc++] = {Side::Bottom, tm, tm};
            if (nc <= 6 && std::abs(zm + half) <= kPosTol && std::abs(c.Zd(tm)) < kGrazeVel)
                cands[nc++] = {Side::Top, tm, tm};
        }

        if (nc > 0) {
            double best_t = 0;
            Side best_side = Side::Bottom;
            bool have = false;
            for (int i = 0; i < nc; ++i) {
                const double target = cands[i].side == Side::Bottom ? half : -half;
                const double ts = cands[i].lo == cands[i].hi
                                      ? cands[i].lo
                                      : polish_root(c, target, cands[i].lo, cands[i].hi);
                if (!have || ts < best_t) {
                    best_t = ts;
                    best_side = cands[i].side;
                    have = true;
                }
            }
            return make_event(c, best_t, best_side, p);
        }
        t = t2;
    }
    return std::nullopt;
}

std::optional<ImpactEvent> next_impact(const ImpactEvent& prev, const SystemParams& p,
                                       const Forcing& fo, double t_max) {
    return next_impact(post_impact_state(prev, p), p, fo, t_max);
}

double map_displacement(MapKind kind, double d) {
    switch (kind) {
        case MapKind::P2: return -d;
        case MapKind::P3: return d;
        default: return 0.0;
    }
}

std::pair<double, double> map_residual(MapKind kind, double t_j, double v_pre_j, double t_next,
                                       double v_pre_next, const SystemParams& p, const Forcing& fo) {
    if (t_next <= t_j) throw std::domain_error("map_residual: times must be increasing");
    const double phi = p.phi;
    const double dt = t_next - t_j;
    const double w = apply_impact(v_pre_j, p.r);
    const double res_v =
        w + p.gbar * dt + fo.F1(t_next, phi) - fo.F1(t_j, phi) - v_pre_next;
    const double res_z = w * dt + 0.5 * p.gbar * dt * dt + fo.F2(t_next, phi) - fo.F2(t_j, phi) -
                         fo.F1(t_j, phi) * dt - map_displacement(kind, p.d);
    return {res_v, res_z};
}

}  // namespace vih::flight
