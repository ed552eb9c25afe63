#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gfc/lti.hpp"

namespace gfc {

constexpr double kOmega50Hz = 2.0 * 3.14159265358979323846 * 50.0;
constexpr double kOmega60Hz = 2.0 * 3.14159265358979323846 * 60.0;

/// Pre-disturbance steady state.
struct OperatingPoint {
    double p0 = 0.0;      // p.u. active power
    double q0 = 0.0;      // p.u. reactive power
    double v0 = 1.0;      // p.u. voltage magnitude, > 0
    double omega_0 = kOmega60Hz;  // rad/s

    void validate() const;
};

/// Whether the instantaneous-power 3/2 factor is applied. Per-unit scans with
/// powers already per-unitized can switch it off.
enum class PowerScale { three_halves, unity };

double power_scale_factor(PowerScale s);

/// p = k (vd id + vq iq), q = k (-vd iq + vq id), k = 3/2 or 1.
std::pair<double, double> instantaneous_pq(double v_d, double v_q, double i_d, double i_q,
                                           PowerScale scale = PowerScale::three_halves);

/// dq admittance samples on a frequency grid, sign convention
/// -[Id; Iq] = Y [Vd; Vq].
struct AdmittanceScan {
    std::vector<double> frequencies_hz;
    std::vector<Complex> y_dd, y_dq, y_qd, y_qq;

    void validate() const;
};

/// Frequency-domain Jacobian entries; at least one of p_theta/q_v present.
struct JacobianScan {
    std::vector<double> frequencies_hz;
    std::optional<std::vector<Complex>> p_theta;  // p.u./rad
    std::optional<std::vector<Complex>> q_v;      // p.u./p.u.
    std::optional<std::vector<Complex>> p_v;
    std::optional<std::vector<Complex>> q_theta;
    std::vector<std::string> warnings;  // not serialized

    void validate() const;
};

/// Per frequency: p_v = p0/v0 - k v0 Ydd; p_theta = -q0 - k v0^2 Ydq;
/// q_v = q0/v0 + k v0 Yqd; q_theta = p0 + k v0^2 Yqq.
JacobianScan jacobian_from_admittance(const AdmittanceScan& scan, const OperatingPoint& op,
                                      PowerScale scale = PowerScale::three_halves);

struct Admittance2x2 {
    Complex y_dd, y_dq, y_qd, y_qq;
};

/// Ideal voltage source behind R + j*omega_0*L, evaluated at s. Throws at the
/// poles s = -R/L +- j*omega_0 where the common denominator vanishes.
Admittance2x2 ideal_vsbi_admittance(double r, double l, double omega_0, Complex s);

/// Poles of the VSBI admittance denominator, from its quadratic coefficients.
std::pair<Complex, Complex> ideal_vsbi_poles(double r, double l, double omega_0);

struct IdealVsbiParams {
    double r = 0.0;  // p.u. resistance, >= 0
    double l = 0.0;  // p.u. inductance (omega_0 * l = p.u. reactance), > 0
    OperatingPoint op;

    void validate() const;
};

struct VsbiJacobianEntries {
    Complex p_theta;
    Complex q_v;
};

/// Off-diagonal Jacobian entries of the ideal VSBI at s (signs kept verbatim:
/// the Q/V entry is negative at DC for zero dispatch).
VsbiJacobianEntries ideal_vsbi_jacobian(const IdealVsbiParams& params, Complex s,
                                        PowerScale scale = PowerScale::three_halves);

/// Rational closed forms of the same entries, for black-box simulation.
TransferFunction ideal_vsbi_p_theta_tf(const IdealVsbiParams& params,
                                       PowerScale scale = PowerScale::three_halves);
TransferFunction ideal_vsbi_q_v_tf(const IdealVsbiParams& params,
                                   PowerScale scale = PowerScale::three_halves);

/// Droop-based outer-loop small-signal parameters.
struct DroopParams {
    double droop_d = 0.0;  // p.u. frequency per p.u. power
    double t_f = 0.0;      // power-measurement filter time constant, s
    double x_coup = 0.0;   // p.u. coupling reactance

    void validate() const;
};

/// Closed loop from the POI angle to measured power:
/// -(T_f s^2 + s) / (X T_f s^2 + X s + D). High-frequency gain 1/X, DC zero.
TransferFunction droop_p_theta(const DroopParams& params);

}  // namespace gfc
