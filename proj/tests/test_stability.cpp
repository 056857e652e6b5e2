#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "vih/model.hpp"
#include "vih/solver.hpp"
#include "vih/stability.hpp"

using namespace vih;
using namespace vih::stability;
using flight::MapKind;
using model::cosine_forcing;
using model::Forcing;
using model::SystemParams;
using solver::Orbit11;
using solver::Orbit21;

namespace {

SystemParams params30(double d) {
    SystemParams p;
    p.r = 0.5;
    p.d = d;
    p.gbar = 0.12201;
    p.phi = 0.0;
    return p;
}

Orbit21 solved21(double d) {
    const Forcing fo = cosine_forcing();
    const auto roots = solver::solve_2to1_multistart(params30(d), fo);
    for (const auto& o : roots)
        if (o.valid) return o;
    REQUIRE(false);
    return {};
}

void check_close(const Mat2& got, const Mat2& want, double rel) {
    auto one = [&](double g, double w) {
        CHECK(std::abs(g - w) <= rel * std::max(1.0, std::abs(w)));
    };
    one(got.a, want.a);
    one(got.b, want.b);
    one(got.c, want.c);
    one(got.d, want.d);
}

}  // namespace

TEST_CASE("Mat2 algebra") {
    const Mat2 A{1, 2, 3, 4};
    const Mat2 B{5, 6, 7, 8};
    const Mat2 C = A * B;
    CHECK(C.a == 19);
    CHECK(C.b == 22);
    CHECK(C.c == 43);
    CHECK(C.d == 50);
    CHECK(A.trace() == 5);
    CHECK(A.det() == -2);
}

TEST_CASE("analytic leg Jacobians match finite differences of the simulated maps") {
    const Forcing fo = cosine_forcing();

    SUBCASE("three legs of the 2:1 cycle at d=0.16") {
        const Orbit21 o = solved21(0.16);
        SystemParams sp = params30(0.16);
        sp.phi = o.phi_k;  // legs are defined with the opening impact at t=0
        const double t1 = o.T1(), t2 = o.T1() + o.T2();
        const Leg legs[3] = {{0.0, o.v_k, t1, o.v_k1},
                             {t1, o.v_k1, t2, o.v_k2},
                             {t2, o.v_k2, 2.0, o.v_k}};
        const MapKind kinds[3] = {MapKind::P1, MapKind::P2, MapKind::P3};
        for (int i = 0; i < 3; ++i) {
            const Mat2 J = jacobian_single(kinds[i], legs[i], sp, fo);
            const Mat2 F = oracles::fd_leg_jacobian(kinds[i], legs[i], sp, fo);
            check_close(J, F, 1e-5);
        }
    }
    SUBCASE("two legs of the 1:1 cycle at d=0.252") {
        const Orbit11 o = solver::solve_1to1(params30(0.252), fo, {0.67, 0.13, 1.33});
        REQUIRE(o.valid);
        SystemParams sp = params30(0.252);
        sp.phi = o.phi_k;
        const Leg down{0.0, o.v_k, o.dt_k, o.v_k1};
        const Leg up{o.dt_k, o.v_k1, 2.0, o.v_k};
        check_close(jacobian_single(MapKind::P2, down, sp, fo),
                    oracles::fd_leg_jacobian(MapKind::P2, down, sp, fo), 1e-5);
        check_close(jacobian_single(MapKind::P3, up, sp, fo),
                    oracles::fd_leg_jacobian(MapKind::P3, up, sp, fo), 1e-5);
    }
}

TEST_CASE("2:1 stability report at d=0.16 (frozen)") {
    const Forcing fo = cosine_forcing();
    const Orbit21 o = solved21(0.16);
    const StabilityReport rep = compose_DP(o, params30(0.16), fo);
    REQUIRE(rep.status == StabilityStatus::Ok);
    CHECK(rep.trace == doctest::Approx(-0.008562146012148).epsilon(1e-7));
    CHECK(rep.det == doctest::Approx(0.015625).epsilon(1e-10));
    CHECK(rep.delta == doctest::Approx(-0.062426689655779).epsilon(1e-7));
    CHECK(rep.lambda[0].real() == doctest::Approx(-0.004281073).epsilon(1e-5));
    CHECK(std::abs(rep.lambda[0].imag()) == doctest::Approx(0.124926668).epsilon(1e-5));
    CHECK(rep.lambda[1] == std::conj(rep.lambda[0]));
    CHECK(rep.cls == OrbitClass::StableFocus);
    CHECK(rep.stable());
    CHECK(rep.lambda_min() == doctest::Approx(rep.lambda[0].real()).epsilon(1e-12));
    CHECK(rep.DP.trace() == rep.trace);
    CHECK(rep.DP.det() == rep.det);
    // The quoted closed-form trace expression telescopes to r^6 on a solved
    // cycle, matching Det(DP) rather than Tr(DP); the report carries the
    // comparison rather than asserting agreement.
    CHECK(rep.trace_closed == doctest::Approx(0.015625).epsilon(1e-9));
    CHECK(!rep.trace_matches);
    CHECK(std::abs(rep.trace_closed - rep.det) < 1e-9);
}

TEST_CASE("determinant equals the restitution power along the branch") {
    const Forcing fo = cosine_forcing();
    for (double d : {0.15, 0.16, 0.18, 0.20}) {
        const Orbit21 o = solved21(d);
        const auto rep = compose_DP(o, params30(d), fo);
        REQUIRE(rep.status == StabilityStatus::Ok);
        // Three impacts per cycle: det(DP) = r^6.
        CHECK(rep.det == doctest::Approx(0.015625).epsilon(1e-9));
        CHECK(trace_closed_form(o, params30(d), fo) == doctest::Approx(0.015625).epsilon(1e-8));
    }
}

TEST_CASE("2:1 report at d=0.14 has real contracting eigenvalues (frozen)") {
    const Forcing fo = cosine_forcing();
    const Orbit21 o = solved21(0.14);
    const auto rep = compose_DP(o, params30(0.14), fo);
    REQUIRE(rep.status == StabilityStatus::Ok);
    CHECK(rep.delta > 0);
    CHECK(rep.lambda[0].imag() == 0.0);
    const double lo = std::min(rep.lambda[0].real(), rep.lambda[1].real());
    const double hi = std::max(rep.lambda[0].real(), rep.lambda[1].real());
    CHECK(lo == doctest::Approx(-0.61701127).epsilon(1e-5));
    CHECK(hi == doctest::Approx(-0.02532369).epsilon(1e-4));
    CHECK(rep.cls == OrbitClass::StableNode);
    CHECK(rep.lambda_min() == doctest::Approx(lo).epsilon(1e-12));
}

TEST_CASE("1:1 stability at d=0.252: weakly stable node with det r^4") {
    const Forcing fo = cosine_forcing();
    const Orbit11 o = solver::solve_1to1(params30(0.252), fo, {0.67, 0.13, 1.33});
    REQUIRE(o.valid);
    const auto rep = compose_DP(o, params30(0.252), fo);
    REQUIRE(rep.status == StabilityStatus::Ok);
    CHECK(rep.det == doctest::Approx(0.0625).epsilon(1e-9));  // two impacts: r^4
    CHECK(rep.delta > 0);
    const double lo = std::min(rep.lambda[0].real(), rep.lambda[1].real());
    const double hi = std::max(rep.lambda[0].real(), rep.lambda[1].real());
    CHECK(lo == doctest::Approx(-0.9844).epsilon(2e-3));
    CHECK(hi == doctest::Approx(-0.0635).epsilon(2e-3));
    CHECK(rep.cls == OrbitClass::StableNode);
    CHECK(rep.stable());
    CHECK(rep.lambda_min() > -1.0);
    CHECK(rep.lambda_min() < 0.0);
}

TEST_CASE("grazing legs are rejected or reported, not silently differentiated") {
    // The leg sensitivity divides by the arrival velocity implied by the leg
    // times and start velocity: r*v_l - gbar*T - (F1(t_l1) - F1(t_l)).  Choose
    // v_l to make that vanish.
    const Forcing fo = cosine_forcing();
    const SystemParams sp = params30(0.16);
    const double t0 = 0.0, t1 = 0.5;
    const double v_crit =
        (sp.gbar * (t1 - t0) + fo.F1(t1, sp.phi) - fo.F1(t0, sp.phi)) / sp.r;
    CHECK_THROWS_AS((void)jacobian_single(MapKind::P1, Leg{t0, v_crit, t1, 0.0}, sp, fo),
                    std::domain_error);
    CHECK_NOTHROW((void)jacobian_single(MapKind::P1, Leg{t0, v_crit + 0.1, t1, 0.0}, sp, fo));

    // A cycle containing such a leg is reported, not thrown.
    Orbit21 o = solved21(0.16);
    const double ta = o.T1(), tb = o.T1() + o.T2();
    o.v_k1 = (sp.gbar * (tb - ta) + fo.F1(tb, o.phi_k) - fo.F1(ta, o.phi_k)) / sp.r;
    const auto rep = compose_DP(o, sp, fo);
    CHECK(rep.status == StabilityStatus::GrazingSingularity);
}

TEST_CASE("classify covers the class lattice and the marginal bands") {
    using cplx = std::complex<double>;
    const std::array<cplx, 2> node_s{cplx(-0.5, 0), cplx(-0.2, 0)};
    CHECK(classify(0.09, node_s) == OrbitClass::StableNode);
    const std::array<cplx, 2> node_u{cplx(-1.5, 0), cplx(-0.01, 0)};
    CHECK(classify(2.2, node_u) == OrbitClass::UnstableNode);
    const std::array<cplx, 2> focus_s{cplx(0.3, 0.4), cplx(0.3, -0.4)};
    CHECK(classify(-0.64, focus_s) == OrbitClass::StableFocus);
    const std::array<cplx, 2> focus_u{cplx(0.8, 0.8), cplx(0.8, -0.8)};
    CHECK(classify(-2.56, focus_u) == OrbitClass::UnstableFocus);
    const std::array<cplx, 2> unit{cplx(1.0, 0), cplx(0.1, 0)};
    CHECK(classify(0.81, unit) == OrbitClass::Marginal);
    const std::array<cplx, 2> near_unit{cplx(-1.0 + 5e-9, 0), cplx(-0.1, 0)};
    CHECK(classify(0.81, near_unit) == OrbitClass::Marginal);
}

TEST_CASE("stability JSON record carries the documented fields") {
    const Forcing fo = cosine_forcing();
    const auto rep = compose_DP(solved21(0.16), params30(0.16), fo);
    const auto j = nlohmann::json::parse(to_json(rep));
    CHECK(j.at("trace").get<double>() == doctest::Approx(rep.trace));
    CHECK(j.at("det").get<double>() == doctest::Approx(rep.det));
    CHECK(j.at("delta").get<double>() == doctest::Approx(rep.delta));
    CHECK(j.at("lambda_re").size() == 2);
    CHECK(j.at("lambda_im").size() == 2);
    CHECK(j.at("class").get<std::string>() == class_name(rep.cls));
    CHECK(j.contains("trace_closed_form"));
    CHECK(j.contains("trace_matches_closed_form"));
}
