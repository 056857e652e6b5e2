#include "vih/model.hpp"

#include <cmath>
#include <stdexcept>

namespace vih::model {

void validate(const PhysicalParams& p) {
    if (p.M <= 0 || p.s <= 0 || p.omega <= 0 || p.F_norm <= 0 || p.g <= 0)
        throw std::domain_error("physical parameters must be strictly positive");
    if (!(p.beta > 0) || p.beta > kPi / 2) throw std::domain_error("beta must lie in (0, pi/2]");
}

void validate(const SystemParams& p) {
    if (!(p.r > 0) || !(p.r < 1)) throw std::domain_error("restitution r must lie in (0, 1)");
    if (!(p.d > 0)) throw std::domain_error("dimensionless length d must be positive");
    if (p.gbar < 0) throw std::domain_error("gbar must be non-negative");
}

SystemParams nondimensionalize(const PhysicalParams& p, double r, double phi) {
    validate(p);
    SystemParams out;
    out.r = r;
    out.d = p.s * p.M * p.omega * p.omega / (p.F_norm * kPi * kPi);
    out.gbar = p.M * p.g * std::sin(p.beta) / p.F_norm;
    out.phi = wrap_phase(phi);
    validate(out);
    return out;
}

Forcing cosine_forcing(double phi) {
    Forcing fo;
    fo.f0 = [](double t) { return std::cos(kPi * t); };
    fo.F10 = [](double t) { return std::sin(kPi * t) / kPi; };
    fo.F20 = [](double t) { return -std::cos(kPi * t) / (kPi * kPi); };
    fo.period = 2.0;
    fo.base_phase = wrap_phase(phi);
    fo.cosine = true;
    return fo;
}

double wrap_phase(double x) {
    double y = std::fmod(x, 2 * kPi);
    return y < 0 ? y + 2 * kPi : y;
}

}  // namespace vih::model
