#pragma once

#include <vector>

#include "vih/simulator.hpp"
#include "vih/solver.hpp"

namespace vih::energy {

using sim::ImpactSequence;
using sim::PatternLabel;

enum class VoltageKind { PowerLaw, UserTable };

/// Output-voltage model per impact: strictly increasing in |v_pre|, zero at
/// zero velocity. The default is U = c*|v|^gamma.
struct VoltageModel {
    VoltageKind kind = VoltageKind::PowerLaw;
    double c = 1.0;
    double gamma = 2.0;
    std::vector<std::pair<double, double>> table;  ///< (|v|, U) knots, increasing
    double U_in = 0.0;                             ///< input voltage, reporting only
};

struct EnergySummary {
    std::vector<double> U_list;
    double U_I_avg = 0.0;  ///< sum(U)/N over the window
    double U_T_avg = 0.0;  ///< sum(U)/(tf - t0)
    double t0 = 0.0, tf = 0.0;
};

/// Default simulated-window lengths in dimensionless time.
inline constexpr double kWindow21 = 20.0;
inline constexpr double kWindow11 = 30.0;

[[nodiscard]] double voltage(double v_pre, const VoltageModel& model);

/// Averages over impacts with t in [t0, tf). Throws std::domain_error when
/// the window holds no impact.
[[nodiscard]] EnergySummary averages(const ImpactSequence& seq, const VoltageModel& model,
                                     double t0, double tf);

/// Window covering a whole number of cycles of a classified periodic
/// sequence, anchored at the first recorded impact.
[[nodiscard]] std::pair<double, double> whole_cycle_window(const ImpactSequence& seq,
                                                           const PatternLabel& label);

/// Exact per-cycle averages from a solved orbit's impact velocities.
[[nodiscard]] EnergySummary orbit_energy(const solver::Orbit21& o, const VoltageModel& model);
[[nodiscard]] EnergySummary orbit_energy(const solver::Orbit11& o, const VoltageModel& model);

}  // namespace vih::energy
