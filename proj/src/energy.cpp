#include "vih/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vih::energy {

double voltage(double v_pre, const VoltageModel& model) {
    const double s = std::abs(v_pre);
    if (model.kind == VoltageKind::PowerLaw) return model.c * std::pow(s, model.gamma);
    if (model.table.empty()) throw std::domain_error("voltage: empty lookup table");
    // Piecewise-linear through (0, 0) and the knots; last slope extrapolates.
    double x0 = 0.0, y0 = 0.0;
    for (const auto& [x1, y1] : model.table) {
        if (s <= x1) {
            const double w = x1 > x0 ? (s - x0) / (x1 - x0) : 0.0;
            return y0 + w * (y1 - y0);
        }
        x0 = x1;
        y0 = y1;
    }
    const auto n = model.table.size();
    if (n == 1) {
        const auto& [x1, y1] = model.table[0];
        return x1 > 0 ? y1 * s / x1 : y1;
    }
    const auto& [xa, ya] = model.table[n - 2];
    const auto& [xb, yb] = model.table[n - 1];
    return yb + (s - xb) * (yb - ya) / (xb - xa);
}

EnergySummary averages(const ImpactSequence& seq, const VoltageModel& model, double t0,
                       double tf) {
    if (!(tf > t0)) throw std::domain_error("averages: empty time window");
    EnergySummary out;
    out.t0 = t0;
    out.tf = tf;
    double sum = 0.0;
    for (const auto& ev : seq.events) {
        if (ev.t < t0 || ev.t >= tf) continue;
        const double U = voltage(ev.v_pre, model);
        out.U_list.push_back(U);
        sum += U;
    }
    if (out.U_list.empty()) throw std::domain_error("averages: no impact inside the window");
    out.U_I_avg = sum / static_cast<double>(out.U_list.size());
    out.U_T_avg = sum / (tf - t0);
    return out;
}

std::pair<double, double> whole_cycle_window(const ImpactSequence& seq,
                                             const PatternLabel& label) {
    if (!label.periodic())
        throw std::invalid_argument("whole_cycle_window: sequence is not periodic");
    if (seq.events.empty()) throw std::invalid_argument("whole_cycle_window: empty sequence");
    const double L = 2.0 * label.period_multiple;
    const double ta = seq.events.front().t;
    const double tb = seq.events.back().t;
    const auto cycles = std::floor((tb - ta) / L + 1e-9);
    if (cycles < 1) throw std::domain_error("whole_cycle_window: window shorter than one cycle");
    return {ta, ta + cycles * L};
}

namespace {

EnergySummary from_velocities(std::initializer_list<double> vels, const VoltageModel& model) {
    EnergySummary out;
    out.t0 = 0.0;
    out.tf = 2.0;
    double sum = 0.0;
    for (double v : vels) {
        const double U = voltage(v, model);
        out.U_list.push_back(U);
        sum += U;
    }
    out.U_I_avg = sum / static_cast<double>(out.U_list.size());
    out.U_T_avg = sum / 2.0;
    return out;
}

}  // namespace

EnergySummary orbit_energy(const solver::Orbit21& o, const VoltageModel& model) {
    return from_velocities({o.v_k, o.v_k1, o.v_k2}, model);
}

EnergySummary orbit_energy(const solver::Orbit11& o, const VoltageModel& model) {
    return from_velocities({o.v_k, o.v_k1}, model);
}

}  // namespace vih::energy
