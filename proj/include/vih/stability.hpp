#pragma once

#include <array>
#include <complex>

#include "vih/solver.hpp"

namespace vih::stability {

using flight::MapKind;
using model::Forcing;
using model::SystemParams;
using solver::Orbit11;
using solver::Orbit21;

struct Mat2 {
    double a = 0, b = 0, c = 0, d = 0;  // row-major [[a, b], [c, d]]

    [[nodiscard]] double trace() const { return a + d; }
    [[nodiscard]] double det() const { return a * d - b * c; }
};

[[nodiscard]] Mat2 operator*(const Mat2& lhs, const Mat2& rhs);

enum class OrbitClass { StableNode, StableFocus, UnstableNode, UnstableFocus, Marginal };

enum class StabilityStatus { Ok, GrazingSingularity };

struct StabilityReport {
    StabilityStatus status = StabilityStatus::Ok;
    Mat2 DP;
    double trace = 0.0;
    double det = 0.0;
    double delta = 0.0;  ///< trace^2 - 4*det
    std::array<std::complex<double>, 2> lambda{};
    OrbitClass cls = OrbitClass::Marginal;
    double trace_closed = 0.0;   ///< closed-form trace expression, reported for comparison
    bool trace_matches = false;  ///< |trace - trace_closed| <= 1e-6 * max(1, |trace|)

    /// Most negative real part; the period-doubling predicate tracks this
    /// crossing -1.
    [[nodiscard]] double lambda_min() const;
    [[nodiscard]] bool stable() const;
};

enum class CriticalKind { PeriodDoubling, NodeFocusInflection, GrazingProxy };

struct CriticalPointTag {
    CriticalKind kind = CriticalKind::PeriodDoubling;
    double d = 0.0;
};

struct Leg {
    double t_l, v_l;    ///< leg start impact time and pre-impact velocity
    double t_l1, v_l1;  ///< leg end impact time and pre-impact velocity
};

inline constexpr double kGrazeDen = 1e-12;    ///< singularity threshold on the leg denominator
inline constexpr double kMarginalLam = 1e-8;  ///< |lambda|-1 band for Marginal
inline constexpr double kMarginalDelta = 1e-12;

/// Sensitivity of one leg's end impact (time, velocity) to its start impact.
/// Throws std::domain_error when the denominator (the end pre-impact
/// velocity) is below kGrazeDen, which happens exactly at grazing.
[[nodiscard]] Mat2 jacobian_single(MapKind kind, const Leg& leg, const SystemParams& p,
                                   const Forcing& fo);

/// Composed Jacobian over the three legs of a 2:1 cycle, eigenvalues from the
/// trace/determinant closed form, and the stability classification.
[[nodiscard]] StabilityReport compose_DP(const Orbit21& orbit, const SystemParams& p,
                                         const Forcing& fo);

/// Two-leg analogue for 1:1 cycles (no closed-form trace is attached).
[[nodiscard]] StabilityReport compose_DP(const Orbit11& orbit, const SystemParams& p,
                                         const Forcing& fo);

/// Classification from (delta, eigenvalues) with Marginal bands.
[[nodiscard]] OrbitClass classify(double delta, const std::array<std::complex<double>, 2>& lambda);

/// Closed-form trace expression for the 2:1 cycle, evaluated as written; on
/// solved cycles it telescopes to r^6, coinciding with Det(DP) rather than
/// Tr(DP), so compose_DP reports the comparison instead of asserting it.
[[nodiscard]] double trace_closed_form(const Orbit21& orbit, const SystemParams& p,
                                       const Forcing& fo);

/// JSON record {trace, det, delta, lambda_re, lambda_im, class}.
[[nodiscard]] std::string to_json(const StabilityReport& rep);

[[nodiscard]] const char* class_name(OrbitClass c);

}  // namespace vih::stability
