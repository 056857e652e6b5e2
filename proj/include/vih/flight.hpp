#pragma once

#include <optional>
#include <utility>

#include "vih/model.hpp"

namespace vih::flight {

using model::Forcing;
using model::SystemParams;

enum class Side { Bottom, Top };  ///< Bottom wall at Z=+d/2, top wall at Z=-d/2

enum class MapKind { P1, P2, P3, P4 };  ///< B->B, B->T, T->B, T->T

struct ImpactEvent {
    double t = 0.0;
    Side side = Side::Bottom;
    double v_pre = 0.0;   ///< relative velocity just before impact
    double v_post = 0.0;  ///< relative velocity just after impact, -r*v_pre
    double phase = 0.0;   ///< mod(pi*t + phi, 2*pi)
    bool grazing = false; ///< |v_pre| below the grazing threshold
};

/// Free-flight start state (not necessarily on a wall).
struct FreeState {
    double t = 0.0;
    double Z = 0.0;
    double w = 0.0;  ///< velocity at t
};

/// Closed-form flight between impacts, valid until the next wall contact.
struct FlightSegment {
    FreeState start;
    SystemParams params;
    const Forcing* forcing = nullptr;

    [[nodiscard]] double Z(double t) const;
    [[nodiscard]] double Zdot(double t) const;
};

inline constexpr double kPosTol = 1e-12;    ///< impact-position polish tolerance
inline constexpr double kGrazeVel = 1e-6;   ///< grazing tag threshold on |v_pre|
inline constexpr double kRestartEps = 1e-10;///< search restart offset after an impact
inline constexpr double kScanStep = 1.0 / 32.0;  ///< event scan step (period/64)

[[nodiscard]] inline double apply_impact(double v_pre, double r) { return -r * v_pre; }

/// Wall coordinate for a side.
[[nodiscard]] inline double wall_z(Side s, double d) { return s == Side::Bottom ? d / 2 : -d / 2; }

/// Builds the post-impact free state for an impact event.
[[nodiscard]] FreeState post_impact_state(const ImpactEvent& ev, const SystemParams& p);

/// Position and velocity at time t for flight starting at `from`.
[[nodiscard]] std::pair<double, double> flight_eval(const FreeState& from, double t,
                                                    const SystemParams& p, const Forcing& fo);

/// Position and velocity at t >= prev.t for the flight that leaves impact `prev`.
/// Throws std::domain_error for t < prev.t.
[[nodiscard]] std::pair<double, double> flight_eval(const ImpactEvent& prev, double t,
                                                    const SystemParams& p, const Forcing& fo);

/// Earliest wall contact strictly after `from.t`, or nullopt when none occurs
/// before t_max. The returned event has the position root polished below
/// kPosTol and carries the grazing tag.
[[nodiscard]] std::optional<ImpactEvent> next_impact(const FreeState& from, const SystemParams& p,
                                                     const Forcing& fo, double t_max);

[[nodiscard]] std::optional<ImpactEvent> next_impact(const ImpactEvent& prev, const SystemParams& p,
                                                     const Forcing& fo, double t_max);

/// Residuals of the basic map `kind` between two impact times: velocity
/// propagation and position displacement (0 for P1/P4, -d for P2, +d for P3).
[[nodiscard]] std::pair<double, double> map_residual(MapKind kind, double t_j, double v_pre_j,
                                                     double t_next, double v_pre_next,
                                                     const SystemParams& p, const Forcing& fo);

/// Displacement closed by map `kind`.
[[nodiscard]] double map_displacement(MapKind kind, double d);

}  // namespace vih::flight
