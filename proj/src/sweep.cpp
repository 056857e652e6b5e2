#include "vih/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vih/parallel.hpp"

namespace vih::sweep {

using flight::Side;

namespace {

bool same_label(const PatternLabel& a, const PatternLabel& b) {
    return a.kind == b.kind && a.n == b.n && a.m == b.m && a.period_multiple == b.period_multiple;
}

SystemParams at_d(const SystemParams& tmpl, double d) {
    SystemParams p = tmpl;
    p.d = d;
    return p;
}

double min_bottom_speed(const ImpactSequence& seq) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& ev : seq.events)
        if (ev.side == Side::Bottom) m = std::min(m, std::abs(ev.v_pre));
    return std::isfinite(m) ? m : 0.0;
}

bool solved(const BranchPoint& pt) {
    return pt.type == OrbitType::TwoToOne
               ? pt.o21.status != solver::SolveStatus::NoConvergence
               : pt.o11.status != solver::SolveStatus::NoConvergence;
}

}  // namespace

Branch continue_branch(OrbitType type, double d_from, double d_to, double d_step,
                       const SystemParams& tmpl, const Forcing& fo,
                       const std::vector<double>& seed) {
    Branch br;
    const double sgn = d_to >= d_from ? 1.0 : -1.0;
    const double min_step = d_step / 64;
    std::vector<double> guess = seed;

    auto try_point = [&](double d) -> std::optional<BranchPoint> {
        BranchPoint pt;
        pt.d = d;
        pt.type = type;
        if (type == OrbitType::TwoToOne) {
            pt.o21 = solver::solve_2to1(at_d(tmpl, d), fo,
                                        {guess[0], guess[1], guess[2], guess[3]});
            if (pt.o21.status == solver::SolveStatus::NoConvergence) return std::nullopt;
            guess = {pt.o21.v_k, pt.o21.phi_k, pt.o21.q, pt.o21.p};
        } else {
            pt.o11 = solver::solve_1to1(at_d(tmpl, d), fo, {guess[0], guess[1], guess[2]});
            if (pt.o11.status == solver::SolveStatus::NoConvergence) return std::nullopt;
            guess = {pt.o11.v_k, pt.o11.phi_k, pt.o11.dt_k};
        }
        return pt;
    };

    auto first = try_point(d_from);
    if (!first) {
        br.end_reason = BranchEnd::NoConvergence;
        br.end_d = d_from;
        return br;
    }
    br.points.push_back(*first);

    double d = d_from;
    double step = d_step;
    while (sgn * (d_to - d) > 1e-12) {
        const double d_next = sgn > 0 ? std::min(d + step, d_to) : std::max(d - step, d_to);
        const auto saved = guess;
        if (auto pt = try_point(d_next)) {
            br.points.push_back(*pt);
            d = d_next;
            step = d_step;
            continue;
        }
        guess = saved;
        step /= 2;
        if (step < min_step) {
            br.end_reason = BranchEnd::NoConvergence;
            br.end_d = d_next;
            // A converged branch that dies right after the closing impact speed
            // collapses has hit the grazing boundary rather than lost the root.
            const auto& last = br.points.back();
            const double vk1 = last.type == OrbitType::TwoToOne ? last.o21.v_k1 : last.o11.v_k1;
            if (std::abs(vk1) < 2e-2) br.end_reason = BranchEnd::GrazingSingularity;
            break;
        }
    }
    if (sgn * (d_to - d) <= 1e-12) br.end_d = d_to;
    std::sort(br.points.begin(), br.points.end(),
              [](const BranchPoint& a, const BranchPoint& b) { return a.d < b.d; });
    return br;
}

void annotate_branch(Branch& br, const SystemParams& tmpl, const Forcing& fo,
                     const VoltageModel& model, int jobs) {
    par::parallel_for(br.points.size(), jobs, [&](std::size_t i) {
        auto& pt = br.points[i];
        if (!solved(pt)) return;
        const auto p = at_d(tmpl, pt.d);
        if (pt.type == OrbitType::TwoToOne) {
            pt.stab = stability::compose_DP(pt.o21, p, fo);
            pt.energy = energy::orbit_energy(pt.o21, model);
        } else {
            pt.stab = stability::compose_DP(pt.o11, p, fo);
            pt.energy = energy::orbit_energy(pt.o11, model);
        }
    });
}

namespace {

double predicate_value(const StabilityReport& rep, CriticalPredicate pred) {
    return pred == CriticalPredicate::LambdaCrossesMinusOne ? rep.lambda_min() + 1.0 : rep.delta;
}

std::optional<StabilityReport> stab_at(OrbitType type, double d, std::vector<double>& guess,
                                       const SystemParams& tmpl, const Forcing& fo) {
    const auto p = at_d(tmpl, d);
    if (type == OrbitType::TwoToOne) {
        const auto o = solver::solve_2to1(p, fo, {guess[0], guess[1], guess[2], guess[3]});
        if (o.status == solver::SolveStatus::NoConvergence) return std::nullopt;
        guess = {o.v_k, o.phi_k, o.q, o.p};
        const auto rep = stability::compose_DP(o, p, fo);
        if (rep.status != stability::StabilityStatus::Ok) return std::nullopt;
        return rep;
    }
    const auto o = solver::solve_1to1(p, fo, {guess[0], guess[1], guess[2]});
    if (o.status == solver::SolveStatus::NoConvergence) return std::nullopt;
    guess = {o.v_k, o.phi_k, o.dt_k};
    const auto rep = stability::compose_DP(o, p, fo);
    if (rep.status != stability::StabilityStatus::Ok) return std::nullopt;
    return rep;
}

std::vector<double> guess_of(const BranchPoint& pt) {
    if (pt.type == OrbitType::TwoToOne)
        return {pt.o21.v_k, pt.o21.phi_k, pt.o21.q, pt.o21.p};
    return {pt.o11.v_k, pt.o11.phi_k, pt.o11.dt_k};
}

}  // namespace

std::vector<CriticalPointTag> locate_critical(const Branch& br, CriticalPredicate pred,
                                              const SystemParams& tmpl, const Forcing& fo) {
    std::vector<CriticalPointTag> tags;
    const auto kind = pred == CriticalPredicate::LambdaCrossesMinusOne
                          ? CriticalKind::PeriodDoubling
                          : CriticalKind::NodeFocusInflection;
    for (std::size_t i = 0; i + 1 < br.points.size(); ++i) {
        const auto& a = br.points[i];
        const auto& b = br.points[i + 1];
        if (!a.stab || !b.stab) continue;
        if (a.stab->status != stability::StabilityStatus::Ok ||
            b.stab->status != stability::StabilityStatus::Ok)
            continue;
        double va = predicate_value(*a.stab, pred);
        double vb = predicate_value(*b.stab, pred);
        if (va == 0.0 || va * vb >= 0.0) continue;
        double lo = a.d, hi = b.d;
        auto guess = guess_of(a);
        while (hi - lo > 1e-5) {
            const double mid = 0.5 * (lo + hi);
            auto saved = guess;
            const auto rep = stab_at(a.type, mid, guess, tmpl, fo);
            if (!rep) {
                guess = saved;
                break;
            }
            const double vm = predicate_value(*rep, pred);
            if (va * vm <= 0.0) {
                hi = mid;
            } else {
                lo = mid;
                va = vm;
            }
        }
        tags.push_back({kind, 0.5 * (lo + hi)});
    }
    std::sort(tags.begin(), tags.end(),
              [](const CriticalPointTag& x, const CriticalPointTag& y) { return x.d < y.d; });
    return tags;
}

std::optional<std::pair<double, double>> stable_interval(const Branch& br) {
    std::optional<std::pair<double, double>> best;
    std::size_t i = 0;
    const auto& pts = br.points;
    auto ok = [](const BranchPoint& pt) {
        bool valid = pt.type == OrbitType::TwoToOne ? pt.o21.valid : pt.o11.valid;
        return valid && pt.stab && pt.stab->stable();
    };
    while (i < pts.size()) {
        if (!ok(pts[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < pts.size() && ok(pts[j + 1])) ++j;
        if (!best || pts[j].d - pts[i].d > best->second - best->first)
            best = {pts[i].d, pts[j].d};
        i = j + 1;
    }
    return best;
}

LineageStep lineage_step(const SystemParams& p, const Forcing& fo, const InitState& init,
                         const LineageOptions& opt) {
    InitState start = init;
    const double lim = p.d / 2 - 1e-9;
    start.Z0 = std::clamp(start.Z0, -lim, lim);
    LineageStep out;
    out.seq = sim::simulate(p, fo, start, opt.t_settle, opt.t_window);
    if (out.seq.events.empty()) {
        out.label.kind = out.seq.termination == sim::Termination::Chatter ? sim::PatternKind::Chatter
                                                                          : sim::PatternKind::Aperiodic;
    } else {
        out.label = sim::classify_pattern(out.seq);
    }
    out.next = sim::carry_state(out.seq.final_state, p);
    return out;
}

std::optional<flight::ImpactEvent> cycle_opening_impact(const ImpactSequence& seq) {
    for (std::size_t i = 1; i < seq.events.size(); ++i)
        if (seq.events[i].side == Side::Bottom && seq.events[i - 1].side == Side::Top)
            return seq.events[i];
    return std::nullopt;
}

GrazingResult grazing_scan(const SystemParams& tmpl, const Forcing& fo, double d_min, double d_max,
                           SweepDirection dir, const LineageOptions& opt) {
    GrazingResult res;
    const bool down = dir == SweepDirection::Down;
    const double start = down ? d_max : d_min;
    const double stop = down ? d_min : d_max;
    const double sgn = down ? -1.0 : 1.0;

    // First landing gets a doubled settle so a cold start can find the attractor.
    LineageOptions first = opt;
    first.t_settle = 2 * opt.t_settle;
    auto st = lineage_step(at_d(tmpl, start), fo, opt.cold_start, first);
    if (!st.label.periodic()) return res;
    const PatternLabel ref = st.label;
    res.before = ref;
    res.min_bottom_speed_before = min_bottom_speed(st.seq);
    InitState state = st.next;

    double d_ref = start;  // last d where the reference label survived
    double d = start;
    while (sgn * (stop - d) > 1e-12) {
        d = sgn > 0 ? std::min(d + opt.d_step, stop) : std::max(d - opt.d_step, stop);
        auto s2 = lineage_step(at_d(tmpl, d), fo, state, opt);
        if (same_label(s2.label, ref)) {
            state = s2.next;
            d_ref = d;
            res.min_bottom_speed_before = min_bottom_speed(s2.seq);
            continue;
        }
        // Bracketed: refine by bisection, always continuing the lineage from
        // the surviving side so the carried attractor state stays warm.
        res.after = s2.label;
        res.min_bottom_speed_after = min_bottom_speed(s2.seq);
        double a = d_ref, b = d;
        while (std::abs(a - b) > 5e-4) {
            const double mid = 0.5 * (a + b);
            auto s3 = lineage_step(at_d(tmpl, mid), fo, state, opt);
            if (same_label(s3.label, ref)) {
                a = mid;
                state = s3.next;
                res.min_bottom_speed_before = min_bottom_speed(s3.seq);
            } else {
                b = mid;
                res.after = s3.label;
                res.min_bottom_speed_after = min_bottom_speed(s3.seq);
            }
        }
        res.found = true;
        res.d_lo = std::min(a, b);
        res.d_hi = std::max(a, b);
        res.d_graz = 0.5 * (a + b);
        return res;
    }
    return res;
}

namespace {

AttractorInfo make_info(const LineageStep& step, const VoltageModel& model) {
    AttractorInfo info;
    info.label = step.label;
    info.seq = step.seq;
    const auto& ev = step.seq.events;
    if (auto open = cycle_opening_impact(step.seq)) {
        info.v_open = std::abs(open->v_pre);
        info.phi_open = open->phase;
    } else if (!ev.empty()) {
        info.v_open = std::abs(ev.front().v_pre);
        info.phi_open = ev.front().phase;
    }
    if (!ev.empty()) {
        if (step.label.periodic()) {
            const auto [t0, tf] = energy::whole_cycle_window(step.seq, step.label);
            info.energy = energy::averages(step.seq, model, t0, tf);
        } else {
            info.energy =
                energy::averages(step.seq, model, ev.front().t, ev.back().t + 1e-9);
        }
    }
    return info;
}

/// Advances a lineage from `cur` to `target` in d_step moves, then evaluates
/// at the target itself.
LineageStep walk_to(double& cur, double target, InitState& state, const SystemParams& tmpl,
                    const Forcing& fo, const LineageOptions& opt) {
    const double sgn = target >= cur ? 1.0 : -1.0;
    while (sgn * (target - cur) > opt.d_step + 1e-12) {
        cur += sgn * opt.d_step;
        auto s = lineage_step(at_d(tmpl, cur), fo, state, opt);
        state = s.next;
    }
    cur = target;
    auto s = lineage_step(at_d(tmpl, target), fo, state, opt);
    state = s.next;
    return s;
}

}  // namespace

std::vector<BistabilityEntry> bistability_report(const SystemParams& tmpl, const Forcing& fo,
                                                 const std::vector<double>& d_values, double d_min,
                                                 double d_max, const VoltageModel& model,
                                                 const LineageOptions& opt) {
    std::vector<double> targets = d_values;
    std::sort(targets.begin(), targets.end());

    LineageOptions first = opt;
    first.t_settle = 2 * opt.t_settle;

    // Down lineage seeded cold at d_max.
    std::vector<AttractorInfo> down_infos(targets.size());
    {
        auto st = lineage_step(at_d(tmpl, d_max), fo, opt.cold_start, first);
        InitState state = st.next;
        double cur = d_max;
        for (std::size_t i = targets.size(); i-- > 0;)
            down_infos[i] = make_info(walk_to(cur, targets[i], state, tmpl, fo, opt), model);
    }
    // Up lineage seeded cold at d_min.
    std::vector<AttractorInfo> up_infos(targets.size());
    {
        auto st = lineage_step(at_d(tmpl, d_min), fo, opt.cold_start, first);
        InitState state = st.next;
        double cur = d_min;
        for (std::size_t i = 0; i < targets.size(); ++i)
            up_infos[i] = make_info(walk_to(cur, targets[i], state, tmpl, fo, opt), model);
    }

    std::vector<BistabilityEntry> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        BistabilityEntry entry;
        entry.d = targets[i];
        entry.attractors.push_back(down_infos[i]);
        const bool duplicate = same_label(down_infos[i].label, up_infos[i].label) &&
                               std::abs(down_infos[i].v_open - up_infos[i].v_open) < 1e-3 &&
                               std::abs(down_infos[i].phi_open - up_infos[i].phi_open) < 1e-2;
        if (!duplicate) entry.attractors.push_back(up_infos[i]);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace vih::sweep
