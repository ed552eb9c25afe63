#include "gfc/envelope.hpp"

#include <cmath>
#include <stdexcept>

#include "gfc/io.hpp"

namespace gfc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDegPerRad = 57.295779513082320877;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::string to_string(Channel c) {
    return c == Channel::p_over_theta ? "P_over_theta" : "Q_over_V";
}

Channel channel_from_string(const std::string& s) {
    if (s == "P_over_theta" || s == "p-theta" || s == "p_theta") return Channel::p_over_theta;
    if (s == "Q_over_V" || s == "q-v" || s == "q_v") return Channel::q_over_v;
    throw std::invalid_argument("unknown channel '" + s + "'");
}

void TimeDomainCriteria::validate() const {
    require(rise_time_max_s > 0.0, "rise_time_max must be positive");
    require(peak_min > 0.0, "peak_min must be positive");
    require(zeta_lpf > 0.0 && zeta_lpf <= 1.0, "zeta_lpf must be in (0, 1]");
    require(zeta_hpf > 0.0 && zeta_hpf <= 1.0, "zeta_hpf must be in (0, 1]");
    if (decay_time_min_s)
        require(*decay_time_min_s > rise_time_max_s,
                "decay_time_min must exceed rise_time_max");
}

double BoundaryFilter::magnitude_at(double f_hz) const {
    return std::abs(tf.eval(Complex(0.0, kTwoPi * f_hz)));
}

BoundaryFilter build_lpf_boundary(double rise_time_max_s, double peak_min, double zeta) {
    require(rise_time_max_s > 0.0 && peak_min > 0.0, "rise time and peak must be positive");
    double omega_n = rise_time_empirical(zeta, 1.0) / rise_time_max_s;
    SecondOrderParams params{zeta, omega_n, peak_min};
    return BoundaryFilter{FilterKind::lowpass, params, second_order_lpf(params),
                          bandwidth_lpf_hz(zeta, omega_n)};
}

BoundaryFilter build_hpf_boundary(double decay_time_min_s, double peak_min, double zeta) {
    require(decay_time_min_s > 0.0 && peak_min > 0.0, "decay time and peak must be positive");
    double omega_n = decay_time_empirical(zeta, 1.0) / decay_time_min_s;
    SecondOrderParams params{zeta, omega_n, peak_min};
    return BoundaryFilter{FilterKind::highpass, params, second_order_hpf(params),
                          bandwidth_hpf_hz(zeta, omega_n)};
}

double intersection_frequency_hz(const BoundaryFilter& lpf, const BoundaryFilter& hpf) {
    double lo = std::min(lpf.bandwidth_hz, hpf.bandwidth_hz);
    double hi = std::max(lpf.bandwidth_hz, hpf.bandwidth_hz);
    auto diff = [&](double f) { return lpf.magnitude_at(f) - hpf.magnitude_at(f); };
    double d_lo = diff(lo);
    double d_hi = diff(hi);
    if (d_lo == 0.0) return lo;
    if (d_hi == 0.0) return hi;
    if (d_lo * d_hi > 0.0)
        throw std::runtime_error("boundary magnitudes do not cross between " + io::sci(lo) +
                                 " Hz and " + io::sci(hi) + " Hz");
    double llo = std::log(lo), lhi = std::log(hi);
    for (int iter = 0; iter < 200 && (lhi - llo) > 1e-6 * 0.5 * std::abs(lhi + llo) + 1e-12;
         ++iter) {
        double mid = 0.5 * (llo + lhi);
        double d = diff(std::exp(mid));
        if (d == 0.0) return std::exp(mid);
        if ((d > 0.0) == (d_lo > 0.0))
            llo = mid;
        else
            lhi = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

double ComplianceEnvelope::min_magnitude_at(double f_hz) const {
    // Tiny relative slack so the exact band edges are evaluable.
    if (f_hz < f_lo_hz * (1.0 - 1e-9) || f_hz > f_hi_hz * (1.0 + 1e-9))
        throw std::runtime_error("frequency " + io::sci(f_hz) + " Hz outside the envelope band [" +
                                 io::sci(f_lo_hz) + ", " + io::sci(f_hi_hz) + "]");
    if (hpf && f_int_hz && f_hz < *f_int_hz) return hpf->magnitude_at(f_hz);
    return lpf.magnitude_at(f_hz);
}

ComplianceEnvelope build_envelope(const TimeDomainCriteria& criteria, const EnvelopeOptions& opt) {
    criteria.validate();
    BoundaryFilter lpf = build_lpf_boundary(criteria.rise_time_max_s, criteria.peak_min,
                                            criteria.zeta_lpf);
    if (!criteria.decay_time_min_s) {
        require(opt.lp_only_floor_hz > 0.0 && opt.lp_only_floor_hz < lpf.bandwidth_hz,
                "lp_only_floor_hz must lie below the LPF bandwidth");
        return ComplianceEnvelope{criteria.channel, std::nullopt, lpf, opt.lp_only_floor_hz,
                                  std::nullopt, lpf.bandwidth_hz};
    }
    BoundaryFilter hpf = build_hpf_boundary(*criteria.decay_time_min_s, criteria.peak_min,
                                            criteria.zeta_hpf);
    double f_int = intersection_frequency_hz(lpf, hpf);
    return ComplianceEnvelope{criteria.channel, hpf, lpf, hpf.bandwidth_hz, f_int,
                              lpf.bandwidth_hz};
}

TimeDomainCriteria preset_criteria(Preset p) {
    // Angle-channel peaks: 0.2 p.u. per 10 degrees, normalized to p.u./rad.
    const double peak_per_rad = 0.2 * kDegPerRad / 10.0;
    const double one_cycle_60hz = 1.0 / 60.0;
    TimeDomainCriteria c;
    switch (p) {
        case Preset::aemo_p:
        case Preset::miso_p:
            c.channel = Channel::p_over_theta;
            c.rise_time_max_s = 15e-3;
            c.peak_min = peak_per_rad;
            break;
        case Preset::ercot_p:
            c.channel = Channel::p_over_theta;
            c.rise_time_max_s = one_cycle_60hz;
            c.peak_min = peak_per_rad;
            c.decay_time_min_s = 50e-3;
            break;
        case Preset::ercot_q:
            c.channel = Channel::q_over_v;
            c.rise_time_max_s = one_cycle_60hz;
            c.peak_min = 1.0;  // 0.03 p.u. per 3% magnitude jump
            c.decay_time_min_s = 100e-3;
            break;
    }
    return c;
}

Preset preset_from_string(const std::string& name) {
    if (name == "aemo-p") return Preset::aemo_p;
    if (name == "miso-p") return Preset::miso_p;
    if (name == "ercot-p") return Preset::ercot_p;
    if (name == "ercot-q") return Preset::ercot_q;
    throw std::invalid_argument("unknown preset '" + name +
                                "' (expected aemo-p, miso-p, ercot-p, ercot-q)");
}

std::string to_string(Preset p) {
    switch (p) {
        case Preset::aemo_p: return "aemo-p";
        case Preset::miso_p: return "miso-p";
        case Preset::ercot_p: return "ercot-p";
        case Preset::ercot_q: return "ercot-q";
    }
    return {};
}

void EntsoeParams::validate() const {
    require(x_eff > 0.0, "x_eff must be positive");
    require(k_f > 0.0, "k_f must be positive");
    require(omega_0 > 0.0, "omega_0 must be positive");
}

double entsoe_peak_current(const EntsoeParams& p) {
    p.validate();
    return -(p.u_inv / p.x_eff) * std::sin(p.delta_rad);
}

double entsoe_decay_tau(const EntsoeParams& p) {
    p.validate();
    return p.x_eff / (p.k_f * p.omega_0);
}

void write_envelope_csv(const ComplianceEnvelope& env, std::size_t n_points,
                        const std::filesystem::path& path) {
    if (n_points < 2) throw std::invalid_argument("need at least 2 envelope points");
    std::string out = "f_hz,min_magnitude,branch\n";
    double llo = std::log(env.f_lo_hz), lhi = std::log(env.f_hi_hz);
    for (std::size_t i = 0; i < n_points; ++i) {
        double f = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                      static_cast<double>(n_points - 1));
        bool hpf_branch = env.hpf && env.f_int_hz && f < *env.f_int_hz;
        out += io::sci(f);
        out += ',';
        out += io::sci(env.min_magnitude_at(f));
        out += ',';
        out += hpf_branch ? "HPF" : "LPF";
        out += '\n';
    }
    io::atomic_write(path, out);
}

void write_envelope_metadata(const ComplianceEnvelope& env, const TimeDomainCriteria& criteria,
                             const std::filesystem::path& path) {
    io::TextDoc doc;
    doc.set("channel", to_string(env.channel));
    doc.set("rise_time_max_s", criteria.rise_time_max_s);
    doc.set("peak_min", criteria.peak_min);
    if (criteria.decay_time_min_s) doc.set("decay_time_min_s", *criteria.decay_time_min_s);
    doc.set("lpf.zeta", env.lpf.params.zeta);
    doc.set("lpf.omega_n_rad_s", env.lpf.params.omega_n);
    doc.set("lpf.gain", env.lpf.params.gain);
    doc.set("lpf.bandwidth_hz", env.lpf.bandwidth_hz);
    if (env.hpf) {
        doc.set("hpf.zeta", env.hpf->params.zeta);
        doc.set("hpf.omega_n_rad_s", env.hpf->params.omega_n);
        doc.set("hpf.gain", env.hpf->params.gain);
        doc.set("hpf.bandwidth_hz", env.hpf->bandwidth_hz);
    }
    doc.set("f_lo_hz", env.f_lo_hz);
    if (env.f_int_hz) doc.set("f_int_hz", *env.f_int_hz);
    doc.set("f_hi_hz", env.f_hi_hz);
    io::atomic_write(path, doc.to_string());
}

}  // namespace gfc
