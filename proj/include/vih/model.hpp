#pragma once

#include <functional>

namespace vih::model {

inline constexpr double kPi = 3.14159265358979323846;

/// Dimensional device description.
struct PhysicalParams {
    double M = 0.1245;       ///< capsule mass [kg]
    double s = 0.27;         ///< cylinder length [m]
    double omega = 5 * kPi;  ///< forcing angular frequency [rad/s]
    double F_norm = 5.0;     ///< forcing strength norm [N]
    double beta = kPi / 6;   ///< incline angle [rad], (0, pi/2]
    double g = 9.8;          ///< gravitational acceleration [m/s^2]
};

/// Dimensionless parameter set governing the relative dynamics.
struct SystemParams {
    double r = 0.5;      ///< restitution coefficient, (0, 1)
    double d = 0.16;     ///< dimensionless cylinder length
    double gbar = 0.0;   ///< dimensionless gravity forcing
    double phi = 0.0;    ///< global forcing phase, stored mod 2*pi
};

/// Periodic forcing together with its first and second antiderivatives.
///
/// The base callables are zero-phase; a phase shift enters as a time
/// translation by phase/pi, which is exact for any period-2 forcing.
/// `base_phase` participates only in the one-argument accessors; pipeline
/// code passes phases explicitly through the two-argument forms.
struct Forcing {
    std::function<double(double)> f0;   ///< f at zero phase
    std::function<double(double)> F10;  ///< antiderivative of f0
    std::function<double(double)> F20;  ///< antiderivative of F10
    double period = 2.0;
    double base_phase = 0.0;
    bool cosine = false;  ///< true when built by cosine_forcing

    [[nodiscard]] double f(double t, double phase) const { return f0(t + phase / kPi); }
    [[nodiscard]] double F1(double t, double phase) const { return F10(t + phase / kPi); }
    [[nodiscard]] double F2(double t, double phase) const { return F20(t + phase / kPi); }

    [[nodiscard]] double f(double t) const { return f(t, base_phase); }
    [[nodiscard]] double F1(double t) const { return F1(t, base_phase); }
    [[nodiscard]] double F2(double t) const { return F2(t, base_phase); }
};

/// Throws std::domain_error when a field violates its range.
void validate(const PhysicalParams& p);
void validate(const SystemParams& p);

/// d = s*M*omega^2 / (F_norm*pi^2), gbar = M*g*sin(beta) / F_norm.
[[nodiscard]] SystemParams nondimensionalize(const PhysicalParams& p, double r, double phi);

/// f(t) = cos(pi*t + phi), F1 = sin(pi*t + phi)/pi, F2 = -cos(pi*t + phi)/pi^2.
[[nodiscard]] Forcing cosine_forcing(double phi = 0.0);

/// Wraps an angle into [0, 2*pi).
[[nodiscard]] double wrap_phase(double x);

}  // namespace vih::model
