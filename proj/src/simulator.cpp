#include "vih/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vih::sim {

namespace {
constexpr double kWallSnap = 1e-9;     ///< init counts as on-wall within this
constexpr double kChatterDt = 1e-8;    ///< two consecutive gaps below this abort the run
}  // namespace

ImpactSequence simulate(const SystemParams& p, const Forcing& fo, const InitState& init,
                        double t_transient, double t_window) {
    model::validate(p);
    const double half = p.d / 2;
    if (std::abs(init.Z0) > half + kWallSnap)
        throw std::domain_error("simulate: initial position outside the wall gap");

    ImpactSequence out;
    out.params = p;
    out.t_transient = t_transient;
    out.t_window = t_window;
    const double t_begin = init.t0 + t_transient;
    const double t_end = init.t0 + t_transient + t_window;

    flight::FreeState cur{init.t0, init.Z0, init.v0};
    std::size_t total = 0;

    auto record = [&](const flight::ImpactEvent& ev) {
        ++total;
        if (ev.t >= t_begin && ev.t <= t_end) out.events.push_back(ev);
        cur = flight::post_impact_state(ev, p);
        out.final_state = cur;
    };

    // An init sitting on a wall with inward velocity is a pre-impact state.
    if (std::abs(init.Z0 - half) <= kWallSnap && init.v0 > 0) {
        flight::ImpactEvent ev;
        ev.t = init.t0;
        ev.side = Side::Bottom;
        ev.v_pre = init.v0;
        ev.v_post = flight::apply_impact(init.v0, p.r);
        ev.phase = model::wrap_phase(model::kPi * init.t0 + p.phi);
        ev.grazing = std::abs(ev.v_pre) < flight::kGrazeVel;
        record(ev);
    } else if (std::abs(init.Z0 + half) <= kWallSnap && init.v0 < 0) {
        flight::ImpactEvent ev;
        ev.t = init.t0;
        ev.side = Side::Top;
        ev.v_pre = init.v0;
        ev.v_post = flight::apply_impact(init.v0, p.r);
        ev.phase = model::wrap_phase(model::kPi * init.t0 + p.phi);
        ev.grazing = std::abs(ev.v_pre) < flight::kGrazeVel;
        record(ev);
    } else {
        out.final_state = cur;
    }

    double prev_gap = 1.0;
    while (cur.t < t_end) {
        auto ev = flight::next_impact(cur, p, fo, t_end);
        if (!ev) break;
        const double gap = ev->t - cur.t;
        if (gap < kChatterDt && prev_gap < kChatterDt) {
            out.termination = Termination::Chatter;
            return out;
        }
        prev_gap = gap;
        record(*ev);
    }
    out.termination = total == 0 ? Termination::NoImpact : Termination::Completed;
    return out;
}

PatternLabel classify_pattern(const ImpactSequence& seq, int k_max, double tol) {
    if (seq.events.empty()) throw std::invalid_argument("classify_pattern: empty impact sequence");
    if (seq.t_window < 2.0 * k_max)
        throw std::invalid_argument("classify_pattern: window shorter than the repeat horizon");

    PatternLabel lab;
    if (seq.termination == Termination::Chatter) {
        lab.kind = PatternKind::Chatter;
        return lab;
    }

    const auto& ev = seq.events;
    const auto n = ev.size();
    for (int k = 1; k <= k_max; ++k) {
        const double shift = 2.0 * k;
        // Index offset of the first impact at least one cycle after the first.
        std::size_t c = 0;
        while (c < n && ev[c].t < ev[0].t + shift - tol) ++c;
        if (c == 0 || c >= n) continue;
        bool ok = true;
        for (std::size_t i = 0; i + c < n && ok; ++i) {
            ok = ev[i + c].side == ev[i].side &&
                 std::abs(ev[i + c].t - ev[i].t - shift) < tol &&
                 std::abs(ev[i + c].v_pre - ev[i].v_pre) < tol;
        }
        if (!ok) continue;
        int nb = 0;
        for (std::size_t i = 0; i < c; ++i)
            if (ev[i].side == Side::Bottom) ++nb;
        const int nt = static_cast<int>(c) - nb;
        lab.kind = PatternKind::Periodic;
        lab.period_multiple = k;
        if (nb % k == 0 && nt % k == 0) {
            lab.n = nb / k;
            lab.m = nt / k;
        } else {
            lab.n = nb;
            lab.m = nt;
        }
        return lab;
    }
    lab.kind = PatternKind::Aperiodic;
    return lab;
}

std::vector<TrajectorySample> reconstruct_absolute(const ImpactSequence& seq, const Forcing& fo,
                                                   int samples_per_unit) {
    std::vector<TrajectorySample> out;
    if (seq.events.empty()) return out;
    const auto& p = seq.params;
    const double half = p.d / 2;
    const double t0 = seq.events.front().t;
    const double F2_0 = fo.F2(t0, p.phi);
    auto xstar = [&](double t) { return fo.F2(t, p.phi) - F2_0; };

    auto push = [&](double t, double Z, double Zd) {
        const double X = xstar(t);
        out.push_back({t, Z, Zd, X + half, X - half, X - Z});
    };

    for (std::size_t i = 0; i + 1 < seq.events.size(); ++i) {
        const auto st = flight::post_impact_state(seq.events[i], p);
        const double t1 = seq.events[i + 1].t;
        push(seq.events[i].t, st.Z, seq.events[i].v_pre);
        const int nseg = std::max(2, static_cast<int>((t1 - st.t) * samples_per_unit));
        for (int j = 1; j < nseg; ++j) {
            const double t = st.t + (t1 - st.t) * j / nseg;
            auto [Z, Zd] = flight::flight_eval(st, t, p, fo);
            push(t, Z, Zd);
        }
    }
    const auto& last = seq.events.back();
    push(last.t, flight::wall_z(last.side, p.d), last.v_pre);
    return out;
}

InitState carry_state(const flight::FreeState& fin, const SystemParams& next) {
    const double lim = next.d / 2 - 1e-9;
    InitState init;
    init.Z0 = std::clamp(fin.Z, -lim, lim);
    init.v0 = fin.w;
    init.t0 = std::fmod(fin.t, 2.0);
    return init;
}

}  // namespace vih::sim
