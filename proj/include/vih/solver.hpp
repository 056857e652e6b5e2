#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vih/flight.hpp"

namespace vih::solver {

using model::Forcing;
using model::SystemParams;

enum class SolveStatus { Converged, NoConvergence, SpuriousRoot };

/// 2:1 cycle: bottom impact at t_k=0, bottom at 2q, top at 2(q+p), closing at 2.
struct Orbit21 {
    double v_k = 0.0;    ///< pre-impact speed at the cycle-opening bottom impact
    double phi_k = 0.0;  ///< forcing phase at t_k
    double q = 0.0;      ///< first interval fraction, T1 = 2q
    double p = 0.0;      ///< second interval fraction, T2 = 2p
    double v_k1 = 0.0;   ///< recovered pre-impact velocity at t_{k+1} (bottom)
    double v_k2 = 0.0;   ///< recovered pre-impact velocity at t_{k+2} (top)
    double residual_norm = 0.0;
    bool valid = false;
    SolveStatus status = SolveStatus::NoConvergence;
    std::string diagnostics;

    [[nodiscard]] double T1() const { return 2 * q; }
    [[nodiscard]] double T2() const { return 2 * p; }
    [[nodiscard]] double T3() const { return 2 * (1 - q - p); }
};

/// 1:1 cycle: bottom impact at t_k=0, top at dt_k, closing at 2.
struct Orbit11 {
    double v_k = 0.0;
    double phi_k = 0.0;
    double dt_k = 0.0;
    double v_k1 = 0.0;  ///< recovered pre-impact velocity at the top impact
    double residual_norm = 0.0;
    bool valid = false;
    SolveStatus status = SolveStatus::NoConvergence;
    std::string diagnostics;

    [[nodiscard]] double dt_k1() const { return 2 - dt_k; }
};

struct NewtonOptions {
    double tol = 1e-10;        ///< accept when the residual max-norm drops below
    int max_iter = 100;
    double fd_step = 1e-7;     ///< central-difference Jacobian step
    double backtrack = 0.5;    ///< Armijo step-halving factor
    double min_alpha = 1e-12;
};

struct NewtonResult {
    std::vector<double> x;
    bool converged = false;
    int iterations = 0;
    double residual_inf = 0.0;
};

using VectorFn = std::function<std::vector<double>(const std::vector<double>&)>;

/// Damped Newton with finite-difference Jacobian and Armijo backtracking on
/// the squared residual norm.
[[nodiscard]] NewtonResult newton_solve(const VectorFn& fn, std::vector<double> x0,
                                        const NewtonOptions& opt = {});

/// Cosine-specialized residuals of the 2:1 cycle conditions for the unknown
/// quadruple (v, phi, q, p). Falls back to the general form for non-cosine
/// forcing. Throws std::domain_error at q=0 or p=0.
[[nodiscard]] std::array<double, 4> residual_2to1(const std::array<double, 4>& x,
                                                  const SystemParams& p, const Forcing& fo);

/// General-forcing arrangement of the same four conditions, componentwise
/// identical to residual_2to1 under cosine forcing.
[[nodiscard]] std::array<double, 4> residual_2to1_general(const std::array<double, 4>& x,
                                                          const SystemParams& p, const Forcing& fo);

/// Residuals of the 1:1 cycle conditions for the triple (v, phi, dt):
/// period-2 velocity closure plus the two leg displacement conditions.
[[nodiscard]] std::array<double, 3> residual_1to1(const std::array<double, 3>& x,
                                                  const SystemParams& p, const Forcing& fo);

/// Pre-impact velocities at t_{k+1} and t_{k+2} from the solved quadruple.
[[nodiscard]] std::pair<double, double> recover_velocities(double v, double phi, double q, double p,
                                                           const SystemParams& sp, const Forcing& fo);

[[nodiscard]] Orbit21 solve_2to1(const SystemParams& p, const Forcing& fo,
                                 const std::array<double, 4>& guess);
[[nodiscard]] Orbit11 solve_1to1(const SystemParams& p, const Forcing& fo,
                                 const std::array<double, 3>& guess);

/// Physical admissibility: positive intervals, wall-consistent velocity
/// signs, no wall crossing inside any leg. Fills valid + diagnostics.
void validate_orbit(Orbit21& orbit, const SystemParams& p, const Forcing& fo);
void validate_orbit(Orbit11& orbit, const SystemParams& p, const Forcing& fo);

/// Cold-start seed grids.
[[nodiscard]] std::vector<std::array<double, 4>> seed_grid_2to1(const SystemParams& p,
                                                                const Forcing& fo);
[[nodiscard]] std::vector<std::array<double, 3>> seed_grid_1to1();

/// Multistart over the seed grid with duplicate-root removal; deterministic
/// order. `jobs` <= 1 runs serially.
[[nodiscard]] std::vector<Orbit21> solve_2to1_multistart(const SystemParams& p, const Forcing& fo,
                                                         int jobs = 1);
[[nodiscard]] std::vector<Orbit11> solve_1to1_multistart(const SystemParams& p, const Forcing& fo,
                                                         int jobs = 1);

/// JSON record {type, d, r, gbar, v_k, phi_k, q, p, v_k1, v_k2, residual, valid}.
[[nodiscard]] std::string to_json(const Orbit21& o, const SystemParams& p);
[[nodiscard]] std::string to_json(const Orbit11& o, const SystemParams& p);

}  // namespace vih::solver
