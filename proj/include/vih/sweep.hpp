#pragma once

#include <optional>
#include <vector>

#include "vih/energy.hpp"
#include "vih/stability.hpp"

namespace vih::sweep {

using energy::EnergySummary;
using energy::VoltageModel;
using model::Forcing;
using model::SystemParams;
using sim::ImpactSequence;
using sim::InitState;
using sim::PatternLabel;
using solver::Orbit11;
using solver::Orbit21;
using stability::CriticalKind;
using stability::CriticalPointTag;
using stability::StabilityReport;

enum class OrbitType { OneToOne, TwoToOne };

struct BranchPoint {
    double d = 0.0;
    OrbitType type = OrbitType::TwoToOne;
    Orbit21 o21;
    Orbit11 o11;
    std::optional<StabilityReport> stab;
    std::optional<EnergySummary> energy;
};

enum class BranchEnd { RangeEnd, NoConvergence, GrazingSingularity };

struct Branch {
    std::vector<BranchPoint> points;  ///< sorted by d ascending
    BranchEnd end_reason = BranchEnd::RangeEnd;
    double end_d = 0.0;  ///< last d attempted when the branch terminated early
};

struct SweepReport {
    Branch branch;
    std::vector<CriticalPointTag> critical;
    std::vector<std::pair<double, double>> bistable_windows;
};

/// Warm-started continuation from d_from to d_to (either direction). On a
/// failed step the step halves down to d_step/64 before the branch ends.
/// Non-physical converged roots are kept with valid=false.
[[nodiscard]] Branch continue_branch(OrbitType type, double d_from, double d_to, double d_step,
                                     const SystemParams& tmpl, const Forcing& fo,
                                     const std::vector<double>& seed);

/// Attaches stability and exact per-cycle energy to every converged point.
/// `jobs` <= 1 runs serially; results are index-deterministic.
void annotate_branch(Branch& br, const SystemParams& tmpl, const Forcing& fo,
                     const VoltageModel& model, int jobs = 1);

enum class CriticalPredicate { LambdaCrossesMinusOne, DeltaCrossesZero };

/// Bisection (analytic re-solves inside each bracket) on the predicate's sign
/// change, refined to a bracket below 1e-5; tags ordered by d.
[[nodiscard]] std::vector<CriticalPointTag> locate_critical(const Branch& br,
                                                            CriticalPredicate pred,
                                                            const SystemParams& tmpl,
                                                            const Forcing& fo);

/// Largest contiguous run of valid stable points; nullopt when none.
[[nodiscard]] std::optional<std::pair<double, double>> stable_interval(const Branch& br);

enum class SweepDirection { Down, Up };

struct GrazingResult {
    bool found = false;
    double d_lo = 0.0, d_hi = 0.0;  ///< final bracket, |d_hi - d_lo| < 5e-4
    double d_graz = 0.0;            ///< bracket midpoint
    PatternLabel before, after;     ///< labels on the two sides of the bracket
    double min_bottom_speed_before = 0.0;  ///< min bottom |v_pre| on the surviving side
    double min_bottom_speed_after = 0.0;   ///< min bottom |v_pre| on the changed side
};

struct LineageOptions {
    double d_step = 1e-3;
    double t_settle = 200.0;
    double t_window = 80.0;
    InitState cold_start{0.0, 0.3, 0.0};
};

/// Hysteresis protocol: simulations walk the d range carrying the attractor
/// state between steps; the label-change point is bisected to 5e-4.
[[nodiscard]] GrazingResult grazing_scan(const SystemParams& tmpl, const Forcing& fo, double d_min,
                                         double d_max, SweepDirection dir,
                                         const LineageOptions& opt = {});

struct AttractorInfo {
    PatternLabel label;
    double v_open = 0.0;    ///< |v_pre| at the cycle-opening bottom impact
    double phi_open = 0.0;  ///< phase at that impact
    EnergySummary energy;
    ImpactSequence seq;
};

struct BistabilityEntry {
    double d = 0.0;
    std::vector<AttractorInfo> attractors;  ///< one per distinct lineage outcome
};

/// Runs both warm-start lineages (down from d_max, up from d_min) and reports
/// the attractor(s) found at each requested d.
[[nodiscard]] std::vector<BistabilityEntry> bistability_report(const SystemParams& tmpl,
                                                               const Forcing& fo,
                                                               const std::vector<double>& d_values,
                                                               double d_min, double d_max,
                                                               const VoltageModel& model,
                                                               const LineageOptions& opt = {});

/// One lineage step: simulate at d, classify, and hand back the carry state.
struct LineageStep {
    ImpactSequence seq;
    PatternLabel label;
    InitState next;
};
[[nodiscard]] LineageStep lineage_step(const SystemParams& p, const Forcing& fo,
                                       const InitState& init, const LineageOptions& opt);

/// Cycle-opening bottom impact (first bottom following a top impact).
[[nodiscard]] std::optional<flight::ImpactEvent> cycle_opening_impact(const ImpactSequence& seq);

}  // namespace vih::sweep
