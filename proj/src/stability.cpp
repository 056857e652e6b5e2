#include "vih/stability.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vih::stability {

Mat2 operator*(const Mat2& lhs, const Mat2& rhs) {
    return {lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
            lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
}

double StabilityReport::lambda_min() const {
    return std::min(lambda[0].real(), lambda[1].real());
}

bool StabilityReport::stable() const {
    return status == StabilityStatus::Ok && cls != OrbitClass::Marginal &&
           std::max(std::abs(lambda[0]), std::abs(lambda[1])) < 1.0;
}

Mat2 jacobian_single(MapKind, const Leg& leg, const SystemParams& p, const Forcing& fo) {
    const double T = leg.t_l1 - leg.t_l;
    const double den =
        p.r * leg.v_l - p.gbar * T - fo.F1(leg.t_l1, p.phi) + fo.F1(leg.t_l, p.phi);
    if (std::abs(den) < kGrazeDen)
        throw std::domain_error("jacobian_single: grazing leg, vanishing end velocity");
    const double fl = fo.f(leg.t_l, p.phi), fl1 = fo.f(leg.t_l1, p.phi);
    Mat2 m;
    m.a = (p.r * leg.v_l - p.gbar * T - fl * T) / den;
    m.b = -p.r * T / den;
    m.c = m.a * (fl1 + p.gbar) - (fl + p.gbar);
    m.d = -p.r + m.b * (fl1 + p.gbar);
    return m;
}

OrbitClass classify(double delta, const std::array<std::complex<double>, 2>& lambda) {
    const double mod = std::max(std::abs(lambda[0]), std::abs(lambda[1]));
    if (std::abs(mod - 1.0) <= kMarginalLam) return OrbitClass::Marginal;
    const bool focus = delta < -kMarginalDelta;
    if (mod < 1.0) return focus ? OrbitClass::StableFocus : OrbitClass::StableNode;
    return focus ? OrbitClass::UnstableFocus : OrbitClass::UnstableNode;
}

namespace {

void finish_report(StabilityReport& rep) {
    rep.trace = rep.DP.trace();
    rep.det = rep.DP.det();
    rep.delta = rep.trace * rep.trace - 4 * rep.det;
    if (rep.delta >= 0) {
        const double s = std::sqrt(rep.delta);
        rep.lambda = {std::complex<double>((rep.trace + s) / 2, 0.0),
                      std::complex<double>((rep.trace - s) / 2, 0.0)};
    } else {
        const double s = std::sqrt(-rep.delta);
        rep.lambda = {std::complex<double>(rep.trace / 2, s / 2),
                      std::complex<double>(rep.trace / 2, -s / 2)};
    }
    rep.cls = classify(rep.delta, rep.lambda);
}

SystemParams with_phase(const SystemParams& p, double phi) {
    SystemParams q = p;
    q.phi = phi;
    return q;
}

}  // namespace

StabilityReport compose_DP(const Orbit21& orbit, const SystemParams& p, const Forcing& fo) {
    StabilityReport rep;
    const auto sp = with_phase(p, orbit.phi_k);
    const double t1 = orbit.T1(), t2 = orbit.T1() + orbit.T2();
    try {
        const Mat2 D1 =
            jacobian_single(MapKind::P1, {0.0, orbit.v_k, t1, orbit.v_k1}, sp, fo);
        const Mat2 D2 =
            jacobian_single(MapKind::P2, {t1, orbit.v_k1, t2, orbit.v_k2}, sp, fo);
        const Mat2 D3 =
            jacobian_single(MapKind::P3, {t2, orbit.v_k2, 2.0, orbit.v_k}, sp, fo);
        rep.DP = D3 * D2 * D1;
    } catch (const std::domain_error&) {
        rep.status = StabilityStatus::GrazingSingularity;
        return rep;
    }
    finish_report(rep);
    rep.trace_closed = trace_closed_form(orbit, p, fo);
    rep.trace_matches = std::abs(rep.trace - rep.trace_closed) <=
                        1e-6 * std::max(1.0, std::abs(rep.trace));
    return rep;
}

StabilityReport compose_DP(const Orbit11& orbit, const SystemParams& p, const Forcing& fo) {
    StabilityReport rep;
    const auto sp = with_phase(p, orbit.phi_k);
    try {
        const Mat2 D1 =
            jacobian_single(MapKind::P2, {0.0, orbit.v_k, orbit.dt_k, orbit.v_k1}, sp, fo);
        const Mat2 D2 =
            jacobian_single(MapKind::P3, {orbit.dt_k, orbit.v_k1, 2.0, orbit.v_k}, sp, fo);
        rep.DP = D2 * D1;
    } catch (const std::domain_error&) {
        rep.status = StabilityStatus::GrazingSingularity;
        return rep;
    }
    finish_report(rep);
    return rep;
}

double trace_closed_form(const Orbit21& orbit, const SystemParams& p, const Forcing& fo) {
    const double r = p.r, g = p.gbar, v = orbit.v_k, phi = orbit.phi_k;
    const double T1 = orbit.T1(), T2 = orbit.T2(), T3 = orbit.T3();
    const double tk = 0.0, tk1 = T1, tk2 = T1 + T2, tk3 = 2.0;
    const double sigma1 = r * r * r * v - g * T3 + r * g * T2 - r * r * g * T1;
    const double den = fo.F1(tk2, phi) - fo.F1(tk3, phi) - r * fo.F1(tk1, phi) +
                       r * fo.F1(tk2, phi) + r * r * fo.F1(tk, phi) - r * r * fo.F1(tk1, phi) +
                       sigma1;
    return -std::pow(r, 6) * v / den;
}

std::string to_json(const StabilityReport& rep) {
    nlohmann::json j;
    j["status"] = rep.status == StabilityStatus::Ok ? "ok" : "grazing_singularity";
    j["trace"] = rep.trace;
    j["det"] = rep.det;
    j["delta"] = rep.delta;
    j["lambda_re"] = {rep.lambda[0].real(), rep.lambda[1].real()};
    j["lambda_im"] = {rep.lambda[0].imag(), rep.lambda[1].imag()};
    j["class"] = class_name(rep.cls);
    j["trace_closed_form"] = rep.trace_closed;
    j["trace_matches_closed_form"] = rep.trace_matches;
    return j.dump(2);
}

const char* class_name(OrbitClass c) {
    switch (c) {
        case OrbitClass::StableNode: return "stable_node";
        case OrbitClass::StableFocus: return "stable_focus";
        case OrbitClass::UnstableNode: return "unstable_node";
        case OrbitClass::UnstableFocus: return "unstable_focus";
        case OrbitClass::Marginal: return "marginal";
    }
    return "unknown";
}

}  // namespace vih::stability
