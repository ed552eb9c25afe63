#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gfc/lti.hpp"

namespace gfc {

enum class Channel { p_over_theta, q_over_v };

std::string to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// System-operator time-domain criteria for one response channel. Angle
/// channels carry peak values normalized to p.u. per radian.
struct TimeDomainCriteria {
    Channel channel = Channel::p_over_theta;
    double rise_time_max_s = 0.0;
    double peak_min = 0.0;  // p.u./rad or p.u./p.u.
    std::optional<double> decay_time_min_s;
    double zeta_lpf = 1.0;
    double zeta_hpf = 1.0;

    void validate() const;
};

enum class FilterKind { lowpass, highpass };

/// One branch of the compliance envelope: the standard second-order filter
/// whose step response is critically compliant with the time-domain bound.
struct BoundaryFilter {
    FilterKind kind;
    SecondOrderParams params;
    TransferFunction tf;
    double bandwidth_hz;

    double magnitude_at(double f_hz) const;
};

/// Solves omega_n from the empirical rise-time polynomial; gain = peak_min.
BoundaryFilter build_lpf_boundary(double rise_time_max_s, double peak_min, double zeta);
/// Solves omega_n from the empirical decay-time polynomial; gain = peak_min.
BoundaryFilter build_hpf_boundary(double decay_time_min_s, double peak_min, double zeta);

/// Magnitude crossing of the two branches, bisection on log-frequency to a
/// relative tolerance of 1e-6. Throws if the magnitudes do not cross between
/// the two bandwidth frequencies.
double intersection_frequency_hz(const BoundaryFilter& lpf, const BoundaryFilter& hpf);

/// Piecewise minimum-magnitude bound: HPF branch below f_int, LPF above.
struct ComplianceEnvelope {
    Channel channel;
    std::optional<BoundaryFilter> hpf;
    BoundaryFilter lpf;
    double f_lo_hz;
    std::optional<double> f_int_hz;
    double f_hi_hz;

    /// Exact branch evaluation; throws outside [f_lo, f_hi].
    double min_magnitude_at(double f_hz) const;
};

struct EnvelopeOptions {
    /// Lower edge of an LP-only envelope (no decay requirement).
    double lp_only_floor_hz = 1.0;
};

ComplianceEnvelope build_envelope(const TimeDomainCriteria& criteria, const EnvelopeOptions& opt = {});

enum class Preset { aemo_p, miso_p, ercot_p, ercot_q };

TimeDomainCriteria preset_criteria(Preset p);
Preset preset_from_string(const std::string& name);  // "aemo-p", "miso-p", "ercot-p", "ercot-q"
std::string to_string(Preset p);

/// ENTSO-E standalone calculators.
struct EntsoeParams {
    double u_inv;      // p.u. POI voltage
    double x_eff;      // p.u. effective reactance at nominal frequency
    double delta_rad;  // angle between internal source and POI
    double k_f;        // droop constant, p.u./p.u.
    double omega_0;    // rad/s

    void validate() const;
};

/// -(u_inv/x_eff) * sin(delta)
double entsoe_peak_current(const EntsoeParams& p);
/// x_eff / (k_f * omega_0)
double entsoe_decay_tau(const EntsoeParams& p);

/// f_hz,min_magnitude,branch rows on a log grid over the band.
void write_envelope_csv(const ComplianceEnvelope& env, std::size_t n_points,
                        const std::filesystem::path& path);
/// Key/value metadata: channel, criteria, per-branch parameters, band edges.
void write_envelope_metadata(const ComplianceEnvelope& env, const TimeDomainCriteria& criteria,
                             const std::filesystem::path& path);

}  // namespace gfc
