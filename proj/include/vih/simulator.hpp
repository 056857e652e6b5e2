#pragma once

#include <optional>
#include <vector>

#include "vih/flight.hpp"

namespace vih::sim {

using flight::FreeState;
using flight::ImpactEvent;
using flight::Side;
using model::Forcing;
using model::SystemParams;

enum class Termination { Completed, Chatter, NoImpact };

struct ImpactSequence {
    std::vector<ImpactEvent> events;  ///< impacts inside [t_transient, t_transient+t_window]
    SystemParams params;
    double t_transient = 0.0;
    double t_window = 0.0;
    Termination termination = Termination::Completed;
    FreeState final_state;  ///< post-impact state at the end of the run, for warm restarts
};

enum class PatternKind { Periodic, Aperiodic, Chatter };

struct PatternLabel {
    PatternKind kind = PatternKind::Aperiodic;
    int n = 0;                ///< bottom impacts per forcing period
    int m = 0;                ///< top impacts per forcing period
    int period_multiple = 0;  ///< orbit period in forcing periods (T = 2*period_multiple)

    [[nodiscard]] bool periodic() const { return kind == PatternKind::Periodic; }
};

struct InitState {
    double Z0 = 0.0;
    double v0 = 0.0;  ///< pre-impact velocity when Z0 sits on a wall moving inward, else free
    double t0 = 0.0;
};

/// Defaults: transient of 200 forcing periods, window of 40, repeat search up to 16 periods.
inline constexpr double kDefaultTransient = 400.0;
inline constexpr double kDefaultWindow = 80.0;
inline constexpr int kDefaultKMax = 16;
inline constexpr double kMatchTol = 1e-5;

/// Event-driven run recording impacts in [t_transient, t_transient + t_window].
/// An init on a wall with inward velocity is treated as a pre-impact state.
[[nodiscard]] ImpactSequence simulate(const SystemParams& p, const Forcing& fo, const InitState& init,
                                      double t_transient = kDefaultTransient,
                                      double t_window = kDefaultWindow);

/// Smallest k <= k_max such that the recorded sequence is invariant under a
/// time shift of 2k (side, shift mismatch < tol, velocity mismatch < tol).
[[nodiscard]] PatternLabel classify_pattern(const ImpactSequence& seq, int k_max = kDefaultKMax,
                                            double tol = kMatchTol);

struct TrajectorySample {
    double t, Z, Zdot, X_top, X_bottom, x_ball;
};

/// Absolute-frame trajectory over the recorded window. The capsule position
/// X*(t) integrates the forcing with X*(t0)=0 and Xdot*(t0)=F1(t0); the ball
/// is x* = X* - Z.
[[nodiscard]] std::vector<TrajectorySample> reconstruct_absolute(const ImpactSequence& seq,
                                                                 const Forcing& fo,
                                                                 int samples_per_unit = 128);

/// Warm-restart helper: continues from a previous run's final state with the
/// position clamped into the new wall gap.
[[nodiscard]] InitState carry_state(const FreeState& fin, const SystemParams& next);

}  // namespace vih::sim
