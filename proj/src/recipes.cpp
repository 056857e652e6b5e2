#include "vih/recipes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vih/csv.hpp"
#include "vih/energy.hpp"
#include "vih/parallel.hpp"
#include "vih/svg.hpp"
#include "vih/sweep.hpp"

namespace vih::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string label_string(const sim::PatternLabel& lab) {
    switch (lab.kind) {
        case sim::PatternKind::Chatter: return "chatter";
        case sim::PatternKind::Aperiodic: return "aperiodic";
        case sim::PatternKind::Periodic: break;
    }
    std::string s = std::to_string(lab.n) + ":" + std::to_string(lab.m);
    if (lab.period_multiple > 1) s += " period-" + std::to_string(lab.period_multiple);
    return s;
}

json label_json(const sim::PatternLabel& lab) {
    return json{{"kind", lab.kind == sim::PatternKind::Periodic
                             ? "periodic"
                             : (lab.kind == sim::PatternKind::Chatter ? "chatter" : "aperiodic")},
                {"n", lab.n},
                {"m", lab.m},
                {"period_multiple", lab.period_multiple},
                {"text", label_string(lab)}};
}

std::string ensure_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out + ": " + ec.message());
    return out;
}

model::Forcing forcing_for(const model::SystemParams&) { return model::cosine_forcing(); }

energy::VoltageModel voltage_model(const EnergySpec& e) {
    energy::VoltageModel m;
    m.kind = e.model == "table" ? energy::VoltageKind::UserTable : energy::VoltageKind::PowerLaw;
    m.c = e.c;
    m.gamma = e.gamma;
    m.table = e.table;
    m.U_in = e.U_in;
    return m;
}

// ---------------------------------------------------------------- simulate

std::vector<std::string> run_simulate(const RunConfig& c) {
    const auto p = effective_params(c);
    const auto fo = forcing_for(p);
    sim::InitState init{c.sim.Z0, c.sim.v0, c.sim.t0};
    sim::ImpactSequence seq;
    try {
        seq = sim::simulate(p, fo, init, c.sim.t_transient, c.sim.t_window);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    sim::PatternLabel lab;
    if (!seq.events.empty())
        lab = sim::classify_pattern(seq, c.sim.k_max);
    else
        lab.kind = seq.termination == sim::Termination::Chatter ? sim::PatternKind::Chatter
                                                                : sim::PatternKind::Aperiodic;

    std::vector<std::string> artifacts;
    const auto dir = ensure_dir(c.out);
    if (c.format == OutFormat::Csv) {
        io::CsvTable t({"t", "side", "v_pre", "v_post", "phase", "grazing"});
        for (const auto& ev : seq.events)
            t.add_row({ev.t, std::string(ev.side == sim::Side::Bottom ? "bottom" : "top"),
                       ev.v_pre, ev.v_post, ev.phase, double(ev.grazing ? 1 : 0)});
        const auto path = dir + "/impacts.csv";
        t.write(path);
        artifacts.push_back(path);

        io::CsvTable s({"pattern", "n", "m", "period_multiple", "termination"});
        s.add_row({label_string(lab), double(lab.n), double(lab.m), double(lab.period_multiple),
                   std::string(seq.termination == sim::Termination::Completed
                                   ? "completed"
                                   : (seq.termination == sim::Termination::Chatter ? "chatter"
                                                                                   : "no_impact"))});
        const auto spath = dir + "/pattern.csv";
        s.write(spath);
        artifacts.push_back(spath);

        if (!seq.events.empty()) {
            io::CsvTable tr({"t", "Z", "Zdot", "X_top", "X_bottom", "x_ball"});
            for (const auto& smp : sim::reconstruct_absolute(seq, fo))
                tr.add_row({smp.t, smp.Z, smp.Zdot, smp.X_top, smp.X_bottom, smp.x_ball});
            const auto tpath = dir + "/trajectory.csv";
            tr.write(tpath);
            artifacts.push_back(tpath);
        }
    } else {
        json j;
        j["params"] = {{"r", p.r}, {"d", p.d}, {"gbar", p.gbar}, {"phi", p.phi}};
        j["termination"] = seq.termination == sim::Termination::Completed
                               ? "completed"
                               : (seq.termination == sim::Termination::Chatter ? "chatter"
                                                                               : "no_impact");
        j["pattern"] = label_json(lab);
        j["impacts"] = json::array();
        for (const auto& ev : seq.events)
            j["impacts"].push_back({{"t", ev.t},
                                    {"side", ev.side == sim::Side::Bottom ? "bottom" : "top"},
                                    {"v_pre", ev.v_pre},
                                    {"v_post", ev.v_post},
                                    {"phase", ev.phase},
                                    {"grazing", ev.grazing}});
        const auto path = dir + "/impacts.json";
        io::write_text(path, j.dump(2));
        artifacts.push_back(path);
    }

    if (c.svg && !seq.events.empty()) {
        const auto traj = sim::reconstruct_absolute(seq, fo);
        io::ChartSpec spec;
        spec.title = "absolute-frame trajectory, d=" + io::format_double(p.d).substr(0, 8);
        spec.xlabel = "t";
        spec.ylabel = "position";
        io::Series ball, top, bottom;
        ball.color = "#1f6fb2";
        top.color = "#b23a1f";
        bottom.color = "#3a9e4f";
        for (const auto& s : traj) {
            ball.pts.emplace_back(s.t, s.x_ball);
            top.pts.emplace_back(s.t, s.X_top);
            bottom.pts.emplace_back(s.t, s.X_bottom);
        }
        spec.series = {bottom, top, ball};
        const auto path = dir + "/trajectory.svg";
        io::write_text(path, io::render_chart(spec));
        artifacts.push_back(path);
    }
    return artifacts;
}

// ------------------------------------------------------------------- solve

struct SolvedRow {
    sweep::OrbitType type;
    solver::Orbit21 o21;
    solver::Orbit11 o11;
    stability::StabilityReport stab;
    bool has_stab = false;
};

void append_orbit_rows(io::CsvTable& t, const std::vector<SolvedRow>& rows,
                       const model::SystemParams& p) {
    for (const auto& row : rows) {
        const bool two = row.type == sweep::OrbitType::TwoToOne;
        const auto& diag = two ? row.o21.diagnostics : row.o11.diagnostics;
        t.add_row({std::string(two ? "2:1" : "1:1"),
                   p.d,
                   two ? row.o21.v_k : row.o11.v_k,
                   two ? row.o21.phi_k : row.o11.phi_k,
                   two ? io::CsvTable::Cell(row.o21.q) : io::CsvTable::Cell(std::string()),
                   two ? io::CsvTable::Cell(row.o21.p) : io::CsvTable::Cell(std::string()),
                   two ? io::CsvTable::Cell(std::string()) : io::CsvTable::Cell(row.o11.dt_k),
                   two ? row.o21.v_k1 : row.o11.v_k1,
                   two ? io::CsvTable::Cell(row.o21.v_k2) : io::CsvTable::Cell(std::string()),
                   two ? row.o21.residual_norm : row.o11.residual_norm,
                   double((two ? row.o21.valid : row.o11.valid) ? 1 : 0),
                   row.has_stab ? io::CsvTable::Cell(row.stab.trace) : std::string(),
                   row.has_stab ? io::CsvTable::Cell(row.stab.det) : std::string(),
                   row.has_stab ? io::CsvTable::Cell(row.stab.delta) : std::string(),
                   row.has_stab ? io::CsvTable::Cell(std::string(stability::class_name(row.stab.cls)))
                                : std::string(),
                   diag});
    }
}

std::vector<std::string> run_solve(const RunConfig& c) {
    const auto p = effective_params(c);
    const auto fo = forcing_for(p);
    const bool two = c.orbit_type == "2:1";
    const int jobs = par::resolve_jobs(c.jobs);

    std::vector<SolvedRow> rows;
    if (c.seed_grid || c.guess.empty()) {
        if (two)
            for (auto& o : solver::solve_2to1_multistart(p, fo, jobs)) {
                SolvedRow r;
                r.type = sweep::OrbitType::TwoToOne;
                r.o21 = std::move(o);
                rows.push_back(std::move(r));
            }
        else
            for (auto& o : solver::solve_1to1_multistart(p, fo, jobs)) {
                SolvedRow r;
                r.type = sweep::OrbitType::OneToOne;
                r.o11 = std::move(o);
                rows.push_back(std::move(r));
            }
    } else {
        if (two) {
            if (c.guess.size() != 4)
                throw ConfigError("a 2:1 guess needs 4 numbers: v, phi, q, p");
            SolvedRow r;
            r.type = sweep::OrbitType::TwoToOne;
            r.o21 = solver::solve_2to1(p, fo, {c.guess[0], c.guess[1], c.guess[2], c.guess[3]});
            rows.push_back(std::move(r));
        } else {
            if (c.guess.size() != 3)
                throw ConfigError("a 1:1 guess needs 3 numbers: v, phi, dt");
            SolvedRow r;
            r.type = sweep::OrbitType::OneToOne;
            r.o11 = solver::solve_1to1(p, fo, {c.guess[0], c.guess[1], c.guess[2]});
            rows.push_back(std::move(r));
        }
    }
    if (rows.empty()) throw NumericalError("no root converged from the seed grid");
    bool any_converged = false;
    for (auto& row : rows) {
        const auto status = row.type == sweep::OrbitType::TwoToOne ? row.o21.status : row.o11.status;
        if (status == solver::SolveStatus::NoConvergence) continue;
        any_converged = true;
        row.stab = row.type == sweep::OrbitType::TwoToOne ? stability::compose_DP(row.o21, p, fo)
                                                          : stability::compose_DP(row.o11, p, fo);
        row.has_stab = true;
    }
    if (!any_converged) throw NumericalError("the cycle solver did not converge");

    const auto dir = ensure_dir(c.out);
    std::vector<std::string> artifacts;
    if (c.format == OutFormat::Csv) {
        io::CsvTable t({"type", "d", "v_k", "phi_k", "q", "p", "dt_k", "v_k1", "v_k2", "residual",
                        "valid", "trace", "det", "delta", "class", "diagnostics"});
        append_orbit_rows(t, rows, p);
        const auto path = dir + "/orbits.csv";
        t.write(path);
        artifacts.push_back(path);
    } else {
        json arr = json::array();
        for (const auto& row : rows) {
            json rec = json::parse(row.type == sweep::OrbitType::TwoToOne
                                       ? solver::to_json(row.o21, p)
                                       : solver::to_json(row.o11, p));
            if (row.has_stab) rec["stability"] = json::parse(stability::to_json(row.stab));
            arr.push_back(std::move(rec));
        }
        const auto path = dir + "/orbits.json";
        io::write_text(path, arr.dump(2));
        artifacts.push_back(path);
    }
    return artifacts;
}

// ------------------------------------------------------------------- sweep

std::vector<double> branch_seed(const RunConfig& c, const model::SystemParams& p0,
                                const model::Forcing& fo, bool two, int jobs) {
    if (!c.guess.empty()) {
        if (two && c.guess.size() != 4)
            throw ConfigError("a 2:1 guess needs 4 numbers: v, phi, q, p");
        if (!two && c.guess.size() != 3)
            throw ConfigError("a 1:1 guess needs 3 numbers: v, phi, dt");
        return c.guess;
    }
    if (two) {
        for (const auto& o : solver::solve_2to1_multistart(p0, fo, jobs))
            if (o.valid) return {o.v_k, o.phi_k, o.q, o.p};
    } else {
        for (const auto& o : solver::solve_1to1_multistart(p0, fo, jobs))
            if (o.valid) return {o.v_k, o.phi_k, o.dt_k};
    }
    throw NumericalError("no admissible cycle found at the sweep start");
}

/// d = 0.6225 s for the reference physical setup (M = 0.1245 kg, omega = 5 pi,
/// amplitude normalization 5); reported alongside d in sweep tables.
double s_equivalent(double d) { return d / 0.6225; }

std::vector<std::string> branch_csv_columns() {
    return {"d",     "s_equiv", "orbit_type", "v_k",        "phi_k",      "dt_k",       "dt_k1",
            "v_k1",  "v_k2",    "trace",      "det",        "delta",      "lambda1_re",
            "lambda1_im",       "lambda2_re", "lambda2_im", "class",      "valid",
            "U_k_list",         "U_I_avg",    "U_T_avg"};
}

void append_branch_row(io::CsvTable& t, const sweep::BranchPoint& pt) {
    const bool is2 = pt.type == sweep::OrbitType::TwoToOne;
    const bool stab_ok = pt.stab && pt.stab->status == stability::StabilityStatus::Ok;
    std::string ulist;
    if (pt.energy)
        for (std::size_t i = 0; i < pt.energy->U_list.size(); ++i) {
            if (i) ulist += ';';
            ulist += io::format_double(pt.energy->U_list[i]);
        }
    auto stab_cell = [&](double v) {
        return stab_ok ? io::CsvTable::Cell(v) : io::CsvTable::Cell(std::string());
    };
    t.add_row({pt.d,
               s_equivalent(pt.d),
               std::string(is2 ? "2:1" : "1:1"),
               is2 ? pt.o21.v_k : pt.o11.v_k,
               is2 ? pt.o21.phi_k : pt.o11.phi_k,
               is2 ? 2.0 * pt.o21.q : pt.o11.dt_k,
               is2 ? 2.0 * pt.o21.p : 2.0 - pt.o11.dt_k,
               is2 ? pt.o21.v_k1 : pt.o11.v_k1,
               is2 ? io::CsvTable::Cell(pt.o21.v_k2) : io::CsvTable::Cell(std::string()),
               stab_cell(pt.stab ? pt.stab->trace : 0.0),
               stab_cell(pt.stab ? pt.stab->det : 0.0),
               stab_cell(pt.stab ? pt.stab->delta : 0.0),
               stab_cell(pt.stab ? pt.stab->lambda[0].real() : 0.0),
               stab_cell(pt.stab ? pt.stab->lambda[0].imag() : 0.0),
               stab_cell(pt.stab ? pt.stab->lambda[1].real() : 0.0),
               stab_cell(pt.stab ? pt.stab->lambda[1].imag() : 0.0),
               stab_ok ? io::CsvTable::Cell(std::string(stability::class_name(pt.stab->cls)))
                       : io::CsvTable::Cell(std::string()),
               double((is2 ? pt.o21.valid : pt.o11.valid) ? 1 : 0),
               ulist,
               pt.energy ? io::CsvTable::Cell(pt.energy->U_I_avg)
                         : io::CsvTable::Cell(std::string()),
               pt.energy ? io::CsvTable::Cell(pt.energy->U_T_avg)
                         : io::CsvTable::Cell(std::string())});
}

std::vector<std::string> run_sweep(const RunConfig& c) {
    const auto p = effective_params(c);
    const auto fo = forcing_for(p);
    const bool two = c.orbit_type == "2:1";
    const int jobs = par::resolve_jobs(c.jobs);
    if (c.sweep.step <= 0) throw ConfigError("sweep.step must be positive");
    if (c.sweep.from == c.sweep.to) throw ConfigError("sweep range is empty");

    auto p0 = p;
    p0.d = c.sweep.from;
    const auto seed = branch_seed(c, p0, fo, two, jobs);

    sweep::SweepReport report;
    report.branch = sweep::continue_branch(two ? sweep::OrbitType::TwoToOne
                                               : sweep::OrbitType::OneToOne,
                                           c.sweep.from, c.sweep.to, c.sweep.step, p, fo, seed);
    if (report.branch.points.empty())
        throw NumericalError("branch continuation failed at the first point");
    sweep::annotate_branch(report.branch, p, fo, voltage_model(c.energy), jobs);
    for (const auto pred : {sweep::CriticalPredicate::LambdaCrossesMinusOne,
                            sweep::CriticalPredicate::DeltaCrossesZero})
        for (const auto& tag : sweep::locate_critical(report.branch, pred, p, fo))
            report.critical.push_back(tag);
    if (const auto win = sweep::stable_interval(report.branch))
        report.bistable_windows.push_back(*win);

    const auto dir = ensure_dir(c.out);
    std::vector<std::string> artifacts;

    io::CsvTable t(branch_csv_columns());
    for (const auto& pt : report.branch.points) append_branch_row(t, pt);
    const auto bpath = dir + "/branch.csv";
    t.write(bpath);
    artifacts.push_back(bpath);

    io::CsvTable ct({"kind", "d"});
    for (const auto& tag : report.critical)
        ct.add_row({std::string(tag.kind == stability::CriticalKind::PeriodDoubling
                                    ? "period_doubling"
                                    : "node_focus_inflection"),
                    tag.d});
    const auto cpath = dir + "/critical.csv";
    ct.write(cpath);
    artifacts.push_back(cpath);

    if (c.format == OutFormat::Json) {
        json j;
        j["end_reason"] = report.branch.end_reason == sweep::BranchEnd::RangeEnd
                              ? "range_end"
                              : (report.branch.end_reason == sweep::BranchEnd::NoConvergence
                                     ? "no_convergence"
                                     : "grazing_singularity");
        j["end_d"] = report.branch.end_d;
        j["n_points"] = report.branch.points.size();
        j["critical"] = json::array();
        for (const auto& tag : report.critical)
            j["critical"].push_back({{"kind", tag.kind == stability::CriticalKind::PeriodDoubling
                                                  ? "period_doubling"
                                                  : "node_focus_inflection"},
                                     {"d", tag.d}});
        if (!report.bistable_windows.empty())
            j["stable_interval"] = {report.bistable_windows[0].first,
                                    report.bistable_windows[0].second};
        const auto jpath = dir + "/sweep.json";
        io::write_text(jpath, j.dump(2));
        artifacts.push_back(jpath);
    }

    if (c.svg) {
        io::ChartSpec spec;
        spec.title = "impact-speed branch";
        spec.xlabel = "d";
        spec.ylabel = "|v_pre|";
        io::Series s1, s2, s3;
        s1.color = "#1f6fb2";
        s2.color = "#b23a1f";
        s3.color = "#3a9e4f";
        for (const auto& pt : report.branch.points) {
            const bool is2 = pt.type == sweep::OrbitType::TwoToOne;
            s1.pts.emplace_back(pt.d, std::abs(is2 ? pt.o21.v_k : pt.o11.v_k));
            s2.pts.emplace_back(pt.d, std::abs(is2 ? pt.o21.v_k1 : pt.o11.v_k1));
            if (is2) s3.pts.emplace_back(pt.d, std::abs(pt.o21.v_k2));
        }
        spec.series = {s1, s2};
        if (!s3.pts.empty()) spec.series.push_back(s3);
        for (const auto& tag : report.critical)
            spec.vlines.push_back({tag.d, tag.kind == stability::CriticalKind::PeriodDoubling
                                              ? "PD"
                                              : "node/focus"});
        const auto spath = dir + "/branch.svg";
        io::write_text(spath, io::render_chart(spec));
        artifacts.push_back(spath);
    }
    return artifacts;
}

// ------------------------------------------------------------------- graze

json graze_json(const sweep::GrazingResult& res, const std::string& direction) {
    json j;
    j["found"] = res.found;
    j["direction"] = direction;
    j["d_lo"] = res.d_lo;
    j["d_hi"] = res.d_hi;
    j["d_graz"] = res.d_graz;
    j["before"] = label_json(res.before);
    j["after"] = label_json(res.after);
    j["min_bottom_speed_before"] = res.min_bottom_speed_before;
    j["min_bottom_speed_after"] = res.min_bottom_speed_after;
    return j;
}

std::vector<std::string> run_graze(const RunConfig& c) {
    const auto p = effective_params(c);
    const auto fo = forcing_for(p);
    const double lo = std::min(c.sweep.from, c.sweep.to);
    const double hi = std::max(c.sweep.from, c.sweep.to);
    if (!(hi > lo)) throw ConfigError("graze needs a non-empty sweep range");
    const auto dir_ = c.sweep.direction == "up" ? sweep::SweepDirection::Up
                                                : sweep::SweepDirection::Down;
    const auto res = sweep::grazing_scan(p, fo, lo, hi, dir_);

    const auto dir = ensure_dir(c.out);
    const auto path = dir + "/graze.json";
    io::write_text(path, graze_json(res, c.sweep.direction).dump(2));
    return {path};
}

// ------------------------------------------------------------------ energy

io::CsvTable attractor_table(const std::vector<sweep::BistabilityEntry>& entries) {
    io::CsvTable t({"d", "lineage", "pattern", "n", "m", "period_multiple", "v_open", "phi_open",
                    "U_I_avg", "U_T_avg"});
    for (const auto& e : entries)
        for (std::size_t a = 0; a < e.attractors.size(); ++a) {
            const auto& at = e.attractors[a];
            t.add_row({e.d, std::string(a == 0 ? "down" : "up"), label_string(at.label),
                       double(at.label.n), double(at.label.m), double(at.label.period_multiple),
                       at.v_open, at.phi_open, at.energy.U_I_avg, at.energy.U_T_avg});
        }
    return t;
}

std::vector<std::string> run_energy(const RunConfig& c) {
    const auto p = effective_params(c);
    const auto fo = forcing_for(p);
    const double lo = std::min(c.sweep.from, c.sweep.to);
    const double hi = std::max(c.sweep.from, c.sweep.to);
    if (!(hi > lo)) throw ConfigError("energy needs a non-empty sweep range");
    if (c.sweep.step <= 0) throw ConfigError("sweep.step must be positive");
    std::vector<double> ds;
    for (double d = lo; d <= hi + 1e-12; d += c.sweep.step) ds.push_back(std::min(d, hi));
    const auto entries = sweep::bistability_report(p, fo, ds, lo, hi, voltage_model(c.energy));

    const auto dir = ensure_dir(c.out);
    std::vector<std::string> artifacts;
    auto t = attractor_table(entries);
    const auto path = dir + "/energy.csv";
    t.write(path);
    artifacts.push_back(path);

    // Per-impact outputs of a single run at the configured d.
    {
        const auto mdl = voltage_model(c.energy);
        const auto seq = sim::simulate(p, fo, {c.sim.Z0, c.sim.v0, c.sim.t0}, c.sim.t_transient,
                                       c.sim.t_window);
        io::CsvTable ti({"t_impact", "side", "v_pre", "U_out"});
        for (const auto& ev : seq.events)
            ti.add_row({ev.t, std::string(ev.side == sim::Side::Bottom ? "bottom" : "top"),
                        ev.v_pre, energy::voltage(ev.v_pre, mdl)});
        const auto ipath = dir + "/energy_impacts.csv";
        ti.write(ipath);
        artifacts.push_back(ipath);
    }

    if (c.svg) {
        io::ChartSpec spec;
        spec.title = "average output per unit time";
        spec.xlabel = "d";
        spec.ylabel = "U_T";
        io::Series down, up;
        down.color = "#1f6fb2";
        up.color = "#b23a1f";
        up.markers = true;
        for (const auto& e : entries) {
            down.pts.emplace_back(e.d, e.attractors.front().energy.U_T_avg);
            if (e.attractors.size() > 1)
                up.pts.emplace_back(e.d, e.attractors.back().energy.U_T_avg);
        }
        spec.series = {down, up};
        const auto spath = dir + "/energy.svg";
        io::write_text(spath, io::render_chart(spec));
        artifacts.push_back(spath);
    }
    return artifacts;
}

// --------------------------------------------------------------- reproduce

/// Dimensionless gravity along the cylinder axis for an incline angle in
/// degrees (mass 0.1245 kg, amplitude normalization 5).
double incline_gravity(double beta_deg) {
    return 0.1245 * 9.8 * std::sin(beta_deg * model::kPi / 180.0) / 5.0;
}

RunConfig recipe_config(const std::string& name, const RunConfig& base) {
    RunConfig c = base;
    c.recipe.clear();
    c.dimensionless_given = true;
    c.params.r = 0.5;
    c.params.phi = 0.0;
    if (name.rfind("fig4-beta", 0) == 0) {
        struct Range {
            const char* deg;
            double from, to;
        };
        static constexpr Range ranges[] = {{"90", 0.200, 0.160},
                                           {"60", 0.190, 0.150},
                                           {"45", 0.185, 0.138},
                                           {"30", 0.200, 0.128}};
        for (const auto& rg : ranges)
            if (name == std::string("fig4-beta") + rg.deg) {
                c.scenario = Scenario::Sweep;
                c.orbit_type = "2:1";
                c.params.gbar = incline_gravity(std::atof(rg.deg));
                c.params.d = rg.from;
                c.sweep = {rg.from, rg.to, 1e-3, "down"};
                c.svg = true;
                return c;
            }
    }
    if (name == "fig6") {
        c.scenario = Scenario::Graze;
        c.params.gbar = incline_gravity(30.0);
        c.params.d = 0.14;
        c.sweep = {0.125, 0.15, 1e-3, "down"};
        return c;
    }
    if (name == "fig2" || name == "fig3" || name == "fig5" || name == "fig7") {
        c.scenario = Scenario::Simulate;  // dispatched to a dedicated runner below
        if (name == "fig7") {
            c.params.gbar = incline_gravity(30.0);
            c.params.d = 0.14;
            c.sweep = {0.13, 0.15, 2e-3, "up"};
            c.svg = true;
        }
        return c;
    }
    throw ConfigError("unknown recipe: " + name + " (see `reproduce --list`)");
}

/// Seven captioned simulations covering 1:1, period-doubled 1:1, and 2:1
/// regimes at two incline setups.
std::vector<std::string> run_fig2(const RunConfig& base) {
    const double g30 = incline_gravity(30.0);
    const double g61 = 0.1245 * 9.8 / 61.0;
    struct Case {
        const char* name;
        double d, gbar, v0, phi;
    };
    // Start each run on the bottom wall with the known impact speed and phase.
    const Case cases[] = {
        {"a", 0.197, g61, 0.5474, 6.211}, {"b", 0.193, g61, 0.561, 6.229},
        {"c", 0.189, g61, 0.465, 6.177},  {"d", 0.252, g30, 0.669, 0.128},
        {"e", 0.222, g30, 0.676, 0.242},  {"f", 0.213, g30, 0.674, 0.321},
        {"g", 0.204, g30, 0.532, 6.106},
    };
    const auto dir = ensure_dir(base.out);
    io::CsvTable t({"case", "d", "gbar", "pattern", "n", "m", "period_multiple"});
    const auto fo = model::cosine_forcing();
    for (const auto& cs : cases) {
        model::SystemParams p{0.5, cs.d, cs.gbar, cs.phi};
        sim::InitState init{cs.d / 2, cs.v0, 0.0};
        const auto seq = sim::simulate(p, fo, init, 1200.0, 80.0);
        sim::PatternLabel lab;
        if (!seq.events.empty()) lab = sim::classify_pattern(seq);
        t.add_row({std::string(cs.name), cs.d, cs.gbar, label_string(lab), double(lab.n),
                   double(lab.m), double(lab.period_multiple)});
    }
    const auto path = dir + "/patterns.csv";
    t.write(path);
    return {path};
}

/// Absolute-frame displacement series for captioned 1:1, 2:1, and 3:1
/// regimes, each started on the bottom wall at the captioned impact state.
std::vector<std::string> run_fig3(const RunConfig& base) {
    struct Case {
        const char* name;
        double d, v0, phi;
    };
    const Case cases[] = {{"a", 0.38, 0.8673, 0.4217},
                          {"b", 0.184, 0.2164, 1.21},
                          {"c", 0.137, 0.2059, 0.6503}};
    const double g30 = incline_gravity(30.0);
    const auto fo = model::cosine_forcing();
    const auto dir = ensure_dir(base.out);
    std::vector<std::string> artifacts;
    io::CsvTable labels({"case", "d", "pattern", "n", "m", "period_multiple"});
    for (const auto& cs : cases) {
        const model::SystemParams p{0.5, cs.d, g30, cs.phi};
        const auto seq = sim::simulate(p, fo, {cs.d / 2, cs.v0, 0.0}, 400.0, 80.0);
        sim::PatternLabel lab;
        if (!seq.events.empty()) lab = sim::classify_pattern(seq);
        labels.add_row({std::string(cs.name), cs.d, label_string(lab), double(lab.n),
                        double(lab.m), double(lab.period_multiple)});

        const auto traj = sim::reconstruct_absolute(seq, fo);
        const double t_end = traj.empty() ? 0.0 : traj.front().t + 8.0;
        io::CsvTable tr({"t", "Z", "Zdot", "X_top", "X_bottom", "x_ball"});
        io::Series ball, topw, botw;
        ball.color = "#b23a1f";
        topw.color = botw.color = "#1f6fb2";
        for (const auto& smp : traj) {
            if (smp.t > t_end) break;
            tr.add_row({smp.t, smp.Z, smp.Zdot, smp.X_top, smp.X_bottom, smp.x_ball});
            ball.pts.emplace_back(smp.t, smp.x_ball);
            topw.pts.emplace_back(smp.t, smp.X_top);
            botw.pts.emplace_back(smp.t, smp.X_bottom);
        }
        const auto tpath = dir + "/trajectory_" + cs.name + ".csv";
        tr.write(tpath);
        artifacts.push_back(tpath);
        if (base.svg) {
            io::ChartSpec spec;
            spec.title = std::string("absolute displacement, case ") + cs.name;
            spec.xlabel = "t";
            spec.ylabel = "position";
            spec.series = {botw, topw, ball};
            const auto spath = dir + "/trajectory_" + cs.name + ".svg";
            io::write_text(spath, io::render_chart(spec));
            artifacts.push_back(spath);
        }
    }
    const auto lpath = dir + "/patterns.csv";
    labels.write(lpath);
    artifacts.push_back(lpath);
    return artifacts;
}

/// Continuation both ways from a mid-window seed, merged into one ascending
/// branch.
sweep::Branch two_sided_branch(sweep::OrbitType type, const model::SystemParams& p,
                               const model::Forcing& fo, double d_mid, double d_lo, double d_hi,
                               double step, const std::vector<double>& seed) {
    auto br = sweep::continue_branch(type, d_mid, d_lo, step, p, fo, seed);
    const auto up = sweep::continue_branch(type, d_mid, d_hi, step, p, fo, seed);
    for (const auto& pt : up.points)
        if (pt.d > d_mid + 1e-9) br.points.push_back(pt);
    std::sort(br.points.begin(), br.points.end(),
              [](const sweep::BranchPoint& a, const sweep::BranchPoint& b) { return a.d < b.d; });
    br.end_reason = up.end_reason;
    br.end_d = up.end_d;
    return br;
}

std::vector<double> multistart_seed_2to1(const model::SystemParams& p, const model::Forcing& fo,
                                         int jobs) {
    for (const auto& o : solver::solve_2to1_multistart(p, fo, jobs))
        if (o.valid) return {o.v_k, o.phi_k, o.q, o.p};
    throw NumericalError("no admissible 2:1 cycle at the branch seed");
}

/// Stability diagnostics (Delta, eigenvalues) along the 2:1 branch of each
/// incline angle, with tagged critical points and the stable windows.
std::vector<std::string> run_fig5(const RunConfig& base) {
    struct Incline {
        const char* tag;
        double deg, d_mid, d_lo, d_hi;
    };
    const Incline inclines[] = {{"beta90", 90.0, 0.195, 0.158, 0.230},
                                {"beta60", 60.0, 0.190, 0.148, 0.230},
                                {"beta45", 45.0, 0.185, 0.138, 0.230},
                                {"beta30", 30.0, 0.180, 0.128, 0.220}};
    const auto fo = model::cosine_forcing();
    const int jobs = par::resolve_jobs(base.jobs);
    const auto dir = ensure_dir(base.out);
    std::vector<std::string> artifacts;
    io::CsvTable wins({"beta_deg", "gbar", "window_lo", "window_hi"});
    io::CsvTable crit({"beta_deg", "kind", "d"});
    io::ChartSpec spec;
    spec.title = "discriminant along the 2:1 branches";
    spec.xlabel = "d";
    spec.ylabel = "Delta";
    const char* colors[] = {"#1f6fb2", "#b23a1f", "#3a9e4f", "#8a5fb2"};
    int ci = 0;
    for (const auto& in : inclines) {
        const model::SystemParams p{0.5, in.d_mid, incline_gravity(in.deg), 0.0};
        const auto seed = multistart_seed_2to1(p, fo, jobs);
        auto br = two_sided_branch(sweep::OrbitType::TwoToOne, p, fo, in.d_mid, in.d_lo, in.d_hi,
                                   1e-3, seed);
        sweep::annotate_branch(br, p, fo, voltage_model(base.energy), jobs);

        io::CsvTable t(branch_csv_columns());
        for (const auto& pt : br.points) append_branch_row(t, pt);
        const auto bpath = dir + "/" + in.tag + ".csv";
        t.write(bpath);
        artifacts.push_back(bpath);

        for (const auto pred : {sweep::CriticalPredicate::LambdaCrossesMinusOne,
                                sweep::CriticalPredicate::DeltaCrossesZero})
            for (const auto& tag : sweep::locate_critical(br, pred, p, fo))
                crit.add_row({in.deg,
                              std::string(tag.kind == stability::CriticalKind::PeriodDoubling
                                              ? "period_doubling"
                                              : "node_focus_inflection"),
                              tag.d});
        const auto win = sweep::stable_interval(br);
        wins.add_row({in.deg, p.gbar,
                      win ? io::CsvTable::Cell(win->first) : io::CsvTable::Cell(std::string()),
                      win ? io::CsvTable::Cell(win->second) : io::CsvTable::Cell(std::string())});

        io::Series ds;
        ds.color = colors[ci++ % 4];
        for (const auto& pt : br.points)
            if (pt.stab && pt.stab->status == stability::StabilityStatus::Ok)
                ds.pts.emplace_back(pt.d, pt.stab->delta);
        spec.series.push_back(ds);
    }
    const auto wpath = dir + "/windows.csv";
    wins.write(wpath);
    artifacts.push_back(wpath);
    const auto cpath = dir + "/critical.csv";
    crit.write(cpath);
    artifacts.push_back(cpath);
    if (base.svg) {
        const auto spath = dir + "/delta.svg";
        io::write_text(spath, io::render_chart(spec));
        artifacts.push_back(spath);
    }
    return artifacts;
}

/// Both hysteresis scans plus the coexisting attractors at d = 0.14.
std::vector<std::string> run_fig6(const RunConfig& base) {
    const auto p = effective_params(base);
    const auto fo = forcing_for(p);
    const double lo = std::min(base.sweep.from, base.sweep.to);
    const double hi = std::max(base.sweep.from, base.sweep.to);
    const auto dir = ensure_dir(base.out);
    std::vector<std::string> artifacts;

    const auto res_dn = sweep::grazing_scan(p, fo, lo, hi, sweep::SweepDirection::Down);
    const auto res_up = sweep::grazing_scan(p, fo, lo, hi, sweep::SweepDirection::Up);
    for (const auto& [res, tag] : {std::pair{&res_dn, "down"}, std::pair{&res_up, "up"}}) {
        const auto path = dir + "/graze_" + tag + ".json";
        io::write_text(path, graze_json(*res, tag).dump(2));
        artifacts.push_back(path);
    }

    const auto entries =
        sweep::bistability_report(p, fo, {0.14}, lo, hi, voltage_model(base.energy));
    auto t = attractor_table(entries);
    const auto apath = dir + "/attractors.csv";
    t.write(apath);
    artifacts.push_back(apath);
    return artifacts;
}

/// Averaged output voltage along the analytic 2:1 and 1:1 branches, plus the
/// simulated lineages across the bistable window.
std::vector<std::string> run_fig7(const RunConfig& base) {
    const auto p = effective_params(base);
    const auto fo = forcing_for(p);
    const int jobs = par::resolve_jobs(base.jobs);
    const auto mdl = voltage_model(base.energy);
    const auto dir = ensure_dir(base.out);
    std::vector<std::string> artifacts;

    io::Series ui21, ut21, ui11, ut11;
    ui21.color = "#b23a1f";
    ut21.color = "#1fa5b2";
    ui11.color = "#d08770";
    ut11.color = "#5e81ac";
    auto emit_branch = [&](sweep::OrbitType type, double d_from, double d_to,
                           const std::vector<double>& seed, const char* fname, io::Series& ui,
                           io::Series& ut) {
        auto br = sweep::continue_branch(type, d_from, d_to, 1e-3, p, fo, seed);
        sweep::annotate_branch(br, p, fo, mdl, jobs);
        io::CsvTable t(branch_csv_columns());
        for (const auto& pt : br.points) {
            append_branch_row(t, pt);
            const bool ok = pt.type == sweep::OrbitType::TwoToOne ? pt.o21.valid : pt.o11.valid;
            if (ok && pt.energy) {
                ui.pts.emplace_back(pt.d, pt.energy->U_I_avg);
                ut.pts.emplace_back(pt.d, pt.energy->U_T_avg);
            }
        }
        const auto path = dir + "/" + fname;
        t.write(path);
        artifacts.push_back(path);
    };

    {
        auto p0 = p;
        p0.d = 0.200;
        emit_branch(sweep::OrbitType::TwoToOne, 0.200, 0.128, multistart_seed_2to1(p0, fo, jobs),
                    "branch21.csv", ui21, ut21);
    }
    {
        auto p0 = p;
        p0.d = 0.450;
        std::vector<double> seed;
        for (const auto& o : solver::solve_1to1_multistart(p0, fo, jobs))
            if (o.valid) {
                seed = {o.v_k, o.phi_k, o.dt_k};
                break;
            }
        if (seed.empty()) throw NumericalError("no admissible 1:1 cycle at the branch seed");
        emit_branch(sweep::OrbitType::OneToOne, 0.450, 0.200, seed, "branch11.csv", ui11, ut11);
    }

    const double lo = std::min(base.sweep.from, base.sweep.to);
    const double hi = std::max(base.sweep.from, base.sweep.to);
    std::vector<double> ds;
    for (double d = lo; d <= hi + 1e-12; d += base.sweep.step) ds.push_back(std::min(d, hi));
    const auto entries = sweep::bistability_report(p, fo, ds, lo, hi, mdl);
    auto wt = attractor_table(entries);
    const auto wpath = dir + "/window.csv";
    wt.write(wpath);
    artifacts.push_back(wpath);

    if (base.svg) {
        io::ChartSpec spec;
        spec.title = "averaged output voltage along the branches";
        spec.xlabel = "d";
        spec.ylabel = "U average";
        io::Series wdn, wup;
        wdn.color = "#3a9e4f";
        wup.color = "#8a5fb2";
        wdn.markers = wup.markers = true;
        for (const auto& e : entries) {
            wdn.pts.emplace_back(e.d, e.attractors.front().energy.U_T_avg);
            if (e.attractors.size() > 1)
                wup.pts.emplace_back(e.d, e.attractors.back().energy.U_T_avg);
        }
        spec.series = {ui21, ut21, ui11, ut11, wdn, wup};
        const auto spath = dir + "/energy.svg";
        io::write_text(spath, io::render_chart(spec));
        artifacts.push_back(spath);
    }
    return artifacts;
}

std::vector<std::string> run_reproduce(const RunConfig& c) {
    if (c.recipe.empty()) throw ConfigError("reproduce needs a recipe name");
    std::vector<std::string> artifacts;
    const auto names = c.recipe == "all" ? recipe_names() : std::vector<std::string>{c.recipe};
    for (const auto& name : names) {
        RunConfig rc = recipe_config(name, c);
        rc.out = c.out + "/" + name;
        auto part = name == "fig2"   ? run_fig2(rc)
                    : name == "fig3" ? run_fig3(rc)
                    : name == "fig5" ? run_fig5(rc)
                    : name == "fig6" ? run_fig6(rc)
                    : name == "fig7" ? run_fig7(rc)
                                     : run(rc);
        artifacts.insert(artifacts.end(), part.begin(), part.end());
    }
    return artifacts;
}

}  // namespace

std::vector<std::string> recipe_names() {
    return {"fig2",       "fig3", "fig4-beta90", "fig4-beta60", "fig4-beta45",
            "fig4-beta30", "fig5", "fig6",        "fig7"};
}

std::vector<std::string> run(const RunConfig& config) {
    switch (config.scenario) {
        case Scenario::Simulate: return run_simulate(config);
        case Scenario::Solve: return run_solve(config);
        case Scenario::Sweep: return run_sweep(config);
        case Scenario::Graze: return run_graze(config);
        case Scenario::Energy: return run_energy(config);
        case Scenario::Reproduce: return run_reproduce(config);
    }
    throw ConfigError("unknown scenario");
}

}  // namespace vih::cli
