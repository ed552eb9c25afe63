#include "gfc/jacobian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "gfc/io.hpp"

namespace gfc {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void OperatingPoint::validate() const {
    require(v0 > 0.0, "operating point v0 must be positive");
    require(omega_0 > 0.0, "operating point omega_0 must be positive");
}

double power_scale_factor(PowerScale s) { return s == PowerScale::three_halves ? 1.5 : 1.0; }

std::pair<double, double> instantaneous_pq(double v_d, double v_q, double i_d, double i_q,
                                           PowerScale scale) {
    double k = power_scale_factor(scale);
    return {k * (v_d * i_d + v_q * i_q), k * (-v_d * i_q + v_q * i_d)};
}

void AdmittanceScan::validate() const {
    require(!frequencies_hz.empty(), "admittance scan grid must not be empty");
    require(y_dd.size() == frequencies_hz.size() && y_dq.size() == frequencies_hz.size() &&
                y_qd.size() == frequencies_hz.size() && y_qq.size() == frequencies_hz.size(),
            "admittance arrays must match the grid length");
}

void JacobianScan::validate() const {
    require(!frequencies_hz.empty(), "jacobian scan grid must not be empty");
    require(p_theta.has_value() || q_v.has_value(),
            "jacobian scan needs at least one of p_theta, q_v");
    auto check_len = [&](const std::optional<std::vector<Complex>>& a, const char* name) {
        if (a && a->size() != frequencies_hz.size())
            throw std::invalid_argument(std::string(name) + " length does not match the grid");
    };
    check_len(p_theta, "p_theta");
    check_len(q_v, "q_v");
    check_len(p_v, "p_v");
    check_len(q_theta, "q_theta");
    for (std::size_t i = 1; i < frequencies_hz.size(); ++i)
        require(frequencies_hz[i] > frequencies_hz[i - 1],
                "jacobian scan frequencies must be strictly increasing");
}

JacobianScan jacobian_from_admittance(const AdmittanceScan& scan, const OperatingPoint& op,
                                      PowerScale scale) {
    scan.validate();
    op.validate();
    double k = power_scale_factor(scale);
    std::size_t n = scan.frequencies_hz.size();
    JacobianScan out;
    out.frequencies_hz = scan.frequencies_hz;
    out.p_theta.emplace(n);
    out.q_v.emplace(n);
    out.p_v.emplace(n);
    out.q_theta.emplace(n);
    for (std::size_t i = 0; i < n; ++i) {
        (*out.p_v)[i] = op.p0 / op.v0 - k * op.v0 * scan.y_dd[i];
        (*out.p_theta)[i] = -op.q0 - k * op.v0 * op.v0 * scan.y_dq[i];
        (*out.q_v)[i] = op.q0 / op.v0 + k * op.v0 * scan.y_qd[i];
        (*out.q_theta)[i] = op.p0 + k * op.v0 * op.v0 * scan.y_qq[i];
    }
    return out;
}

namespace {

Complex vsbi_denominator(double r, double l, double omega_0, Complex s) {
    Complex rs = r + s * l;
    return rs * rs + omega_0 * omega_0 * l * l;
}

void check_vsbi_impedance(double r, double l, double omega_0) {
    require(r >= 0.0, "vsbi resistance must be nonnegative");
    require(l > 0.0, "vsbi inductance must be positive");
    require(omega_0 > 0.0, "omega_0 must be positive");
    require(r != 0.0 || omega_0 * l != 0.0, "vsbi impedance must be nonzero");
}

}  // namespace

Admittance2x2 ideal_vsbi_admittance(double r, double l, double omega_0, Complex s) {
    check_vsbi_impedance(r, l, omega_0);
    Complex den = vsbi_denominator(r, l, omega_0, s);
    if (den == Complex(0.0, 0.0))
        throw std::runtime_error("vsbi admittance is singular at s = (" + io::sci(s.real()) +
                                 ", " + io::sci(s.imag()) + "): pole of the impedance inverse");
    Complex rs = r + s * l;
    double x = omega_0 * l;
    return Admittance2x2{rs / den, x / den, -x / den, rs / den};
}

std::pair<Complex, Complex> ideal_vsbi_poles(double r, double l, double omega_0) {
    check_vsbi_impedance(r, l, omega_0);
    // Roots of l^2 s^2 + 2 r l s + (r^2 + omega_0^2 l^2).
    double a = l * l, b = 2.0 * r * l, c = r * r + omega_0 * omega_0 * l * l;
    Complex disc = std::sqrt(Complex(b * b - 4.0 * a * c, 0.0));
    return {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)};
}

void IdealVsbiParams::validate() const {
    op.validate();
    check_vsbi_impedance(r, l, op.omega_0);
}

VsbiJacobianEntries ideal_vsbi_jacobian(const IdealVsbiParams& params, Complex s,
                                        PowerScale scale) {
    params.validate();
    Complex den = vsbi_denominator(params.r, params.l, params.op.omega_0, s);
    if (den == Complex(0.0, 0.0))
        throw std::runtime_error("vsbi jacobian is singular at s = (" + io::sci(s.real()) + ", " +
                                 io::sci(s.imag()) + ")");
    double k = power_scale_factor(scale);
    double x = params.op.omega_0 * params.l;
    double v0 = params.op.v0;
    Complex common = x / den;
    return VsbiJacobianEntries{-params.op.q0 - k * v0 * v0 * common,
                               params.op.q0 / v0 - k * v0 * common};
}

namespace {

Polynomial vsbi_denominator_poly(const IdealVsbiParams& p) {
    double x = p.op.omega_0 * p.l;
    return Polynomial{p.r * p.r + x * x, 2.0 * p.r * p.l, p.l * p.l};
}

}  // namespace

TransferFunction ideal_vsbi_p_theta_tf(const IdealVsbiParams& params, PowerScale scale) {
    params.validate();
    Polynomial den = vsbi_denominator_poly(params);
    double k = power_scale_factor(scale);
    double x = params.op.omega_0 * params.l;
    double v0 = params.op.v0;
    Polynomial num = den * (-params.op.q0) - Polynomial{k * v0 * v0 * x};
    return TransferFunction(num, den);
}

TransferFunction ideal_vsbi_q_v_tf(const IdealVsbiParams& params, PowerScale scale) {
    params.validate();
    Polynomial den = vsbi_denominator_poly(params);
    double k = power_scale_factor(scale);
    double x = params.op.omega_0 * params.l;
    double v0 = params.op.v0;
    Polynomial num = den * (params.op.q0 / v0) - Polynomial{k * v0 * x};
    return TransferFunction(num, den);
}

void DroopParams::validate() const {
    require(droop_d > 0.0, "droop constant D must be positive");
    require(t_f > 0.0, "filter time constant T_f must be positive");
    require(x_coup > 0.0, "coupling reactance X_coup must be positive");
}

TransferFunction droop_p_theta(const DroopParams& params) {
    params.validate();
    return TransferFunction(Polynomial{0.0, -1.0, -params.t_f},
                            Polynomial{params.droop_d, params.x_coup, params.x_coup * params.t_f});
}

}  // namespace gfc
