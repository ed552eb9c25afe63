#include "gfc/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gfc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool is_theta_input(ScanChannel c) {
    return c == ScanChannel::theta_to_p || c == ScanChannel::theta_to_q;
}

}  // namespace

std::string to_string(ScanChannel c) {
    switch (c) {
        case ScanChannel::theta_to_p: return "theta_to_p";
        case ScanChannel::v_to_q: return "v_to_q";
        case ScanChannel::v_to_p: return "v_to_p";
        case ScanChannel::theta_to_q: return "theta_to_q";
    }
    return {};
}

void TransferFunctionDevice::set_channel(ScanChannel channel, TransferFunction tf) {
    channels_.erase(channel);
    channels_.emplace(channel, std::move(tf));
}

const TransferFunction* TransferFunctionDevice::channel(ScanChannel c) const {
    auto it = channels_.find(c);
    return it == channels_.end() ? nullptr : &it->second;
}

bool TransferFunctionDevice::supports(ScanChannel channel) const {
    return channels_.count(channel) > 0;
}

TimeSeries TransferFunctionDevice::respond(ScanChannel channel,
                                           const std::function<double(double)>& input, double dt,
                                           std::size_t n_samples) const {
    const TransferFunction* tf = this->channel(channel);
    if (!tf)
        throw std::invalid_argument("device does not support channel " + to_string(channel));
    return simulate_lti(*tf, input, dt, n_samples);
}

DroopGfmiDevice::DroopGfmiDevice(DroopParams params) : params_(params) { params_.validate(); }

bool DroopGfmiDevice::supports(ScanChannel channel) const {
    return channel == ScanChannel::theta_to_p;
}

int DroopGfmiDevice::substeps_for(double dt) const {
    double pmax = 0.0;
    for (const Complex& p : polynomial_roots(
             Polynomial{params_.droop_d, params_.x_coup, params_.x_coup * params_.t_f}))
        pmax = std::max(pmax, std::abs(p));
    return std::max(1, static_cast<int>(std::ceil(dt * pmax / 0.1)));
}

TimeSeries DroopGfmiDevice::respond(ScanChannel channel,
                                    const std::function<double(double)>& input, double dt,
                                    std::size_t n_samples) const {
    if (!supports(channel))
        throw std::invalid_argument("droop device does not support channel " + to_string(channel));
    require(dt > 0.0 && n_samples >= 2, "invalid sampling request");

    const double d = params_.droop_d, tf = params_.t_f, x = params_.x_coup;
    // States: xf (filtered power), thc (capacitor angle); Pm is algebraic.
    auto pm = [&](double thc, double u) { return (thc - u) / x; };
    struct Deriv {
        double dxf, dthc;
    };
    auto f = [&](double xf, double thc, double u) {
        return Deriv{(pm(thc, u) - xf) / tf, -d * xf};
    };

    int substeps = substeps_for(dt);
    double h = dt / substeps;

    TimeSeries out;
    out.dt = dt;
    out.samples.resize(n_samples);
    double xf = 0.0, thc = 0.0;
    out.samples[0] = pm(thc, input(0.0));
    for (std::size_t k = 0; k + 1 < n_samples; ++k) {
        double t_base = dt * static_cast<double>(k);
        for (int s = 0; s < substeps; ++s) {
            double t = t_base + h * s;
            double u0 = input(t), um = input(t + 0.5 * h), u1 = input(t + h);
            Deriv k1 = f(xf, thc, u0);
            Deriv k2 = f(xf + 0.5 * h * k1.dxf, thc + 0.5 * h * k1.dthc, um);
            Deriv k3 = f(xf + 0.5 * h * k2.dxf, thc + 0.5 * h * k2.dthc, um);
            Deriv k4 = f(xf + h * k3.dxf, thc + h * k3.dthc, u1);
            xf += h / 6.0 * (k1.dxf + 2.0 * k2.dxf + 2.0 * k3.dxf + k4.dxf);
            thc += h / 6.0 * (k1.dthc + 2.0 * k2.dthc + 2.0 * k3.dthc + k4.dthc);
        }
        out.samples[k + 1] = pm(thc, input(t_base + dt));
    }
    return out;
}

TransferFunctionDevice make_vsbi_device(const IdealVsbiParams& params, PowerScale scale) {
    TransferFunctionDevice dev;
    dev.set_channel(ScanChannel::theta_to_p, ideal_vsbi_p_theta_tf(params, scale));
    dev.set_channel(ScanChannel::v_to_q, ideal_vsbi_q_v_tf(params, scale));
    return dev;
}

std::vector<double> ScanConfig::log_grid(double f_min, double f_max, std::size_t n) {
    require(f_min > 0.0 && f_max > f_min && n >= 2, "invalid log grid request");
    std::vector<double> g(n);
    double llo = std::log(f_min), lhi = std::log(f_max);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = f_min;
    g.back() = f_max;
    return g;
}

std::vector<double> ScanConfig::default_grid() { return log_grid(0.5, 60.0, 40); }

void ScanConfig::validate() const {
    require(!frequencies_hz.empty(), "scan grid must not be empty");
    for (std::size_t i = 0; i < frequencies_hz.size(); ++i) {
        require(frequencies_hz[i] > 0.0, "scan frequencies must be positive");
        require(i == 0 || frequencies_hz[i] > frequencies_hz[i - 1],
                "scan frequencies must be strictly increasing");
    }
    require(amplitude > 0.0, "perturbation amplitude must be positive");
    require(settle_cycles == 0 || settle_cycles >= 3, "settle_cycles must be 0 (auto) or >= 3");
    require(measure_cycles >= 5, "measure_cycles must be at least 5");
    require(z_test == 0.0, "z_test must be zero in this version");
    require(max_total_cycles >= 2 * (settle_cycles + measure_cycles) || max_total_cycles >= 60,
            "max_total_cycles too small");
    double dt_eff = effective_dt();
    require(dt_eff > 0.0, "dt must be positive");
    require(dt_eff <= 1.0 / (50.0 * frequencies_hz.back()) * (1.0 + 1e-12),
            "dt must be at most 1/(50 * max frequency)");
}

double ScanConfig::effective_dt() const {
    if (dt > 0.0) return dt;
    return frequencies_hz.empty() ? 0.0 : 1.0 / (50.0 * frequencies_hz.back());
}

ScanConfig apply_config_doc(ScanConfig base, const io::TextDoc& doc) {
    double f_min = doc.get_double_or("f_min", 0.0);
    double f_max = doc.get_double_or("f_max", 0.0);
    long n_points = doc.get_long_or("n_points", 0);
    if (f_min > 0.0 || f_max > 0.0 || n_points > 0) {
        if (!(f_min > 0.0 && f_max > 0.0 && n_points >= 2))
            throw std::invalid_argument(
                "scan config: f_min, f_max and n_points must be given together");
        base.frequencies_hz = ScanConfig::log_grid(f_min, f_max, static_cast<std::size_t>(n_points));
    }
    base.amplitude = doc.get_double_or("amplitude", base.amplitude);
    base.settle_cycles = static_cast<int>(doc.get_long_or("settle_cycles", base.settle_cycles));
    base.measure_cycles = static_cast<int>(doc.get_long_or("measure_cycles", base.measure_cycles));
    base.dt = doc.get_double_or("dt", base.dt);
    base.max_total_cycles =
        static_cast<int>(doc.get_long_or("max_total_cycles", base.max_total_cycles));
    return base;
}

namespace {

struct CorrelationResult {
    Complex gain;
    double rms_variation;
};

// Correlates the last `measure` whole periods of y against sin/cos at the
// drive frequency. Index phase k % n_per keeps the discrete orthogonality
// exact over whole periods.
CorrelationResult correlate(const TimeSeries& y, std::size_t n_per, int measure, double amplitude) {
    std::size_t window = n_per * static_cast<std::size_t>(measure);
    std::size_t start = y.samples.size() - 1 - window;

    std::vector<double> sin_tab(n_per), cos_tab(n_per);
    for (std::size_t i = 0; i < n_per; ++i) {
        double phase = kTwoPi * static_cast<double>(i) / static_cast<double>(n_per);
        sin_tab[i] = std::sin(phase);
        cos_tab[i] = std::cos(phase);
    }

    double acc_i = 0.0, acc_q = 0.0;
    std::vector<double> period_rms(static_cast<std::size_t>(measure), 0.0);
    for (std::size_t k = 0; k < window; ++k) {
        double v = y.samples[start + k];
        std::size_t idx = (start + k) % n_per;
        acc_i += v * sin_tab[idx];
        acc_q += v * cos_tab[idx];
        period_rms[k / n_per] += v * v;
    }
    double mean_rms = 0.0;
    for (double& r : period_rms) {
        r = std::sqrt(r / static_cast<double>(n_per));
        mean_rms += r;
    }
    mean_rms /= static_cast<double>(measure);

    double variation = 0.0;
    if (mean_rms > 0.0)
        for (double r : period_rms)
            variation = std::max(variation, std::abs(r - mean_rms) / mean_rms);

    double norm = 2.0 / static_cast<double>(window);
    return {Complex(acc_i * norm, acc_q * norm) / amplitude, variation};
}

}  // namespace

Complex sine_perturb_extract(const BlackBoxDevice& device, ScanChannel channel, double f_hz,
                             const ScanConfig& cfg) {
    cfg.validate();
    require(f_hz > 0.0, "scan frequency must be positive");
    if (!device.supports(channel))
        throw std::invalid_argument("device does not support channel " + to_string(channel));

    double dt_max = cfg.effective_dt();
    auto n_per = static_cast<std::size_t>(std::ceil(1.0 / (f_hz * dt_max)));
    n_per = std::max<std::size_t>(n_per, 8);
    double dt = 1.0 / (f_hz * static_cast<double>(n_per));

    int settle = cfg.settle_cycles > 0 ? cfg.settle_cycles : (f_hz < 5.0 ? 10 : 5);
    int total = settle + cfg.measure_cycles;

    double amplitude = cfg.amplitude;
    auto input = [amplitude, f_hz](double t) { return amplitude * std::sin(kTwoPi * f_hz * t); };

    // Extend the dwell geometrically until the measured periods are stationary.
    constexpr double kTargetVariation = 1e-3;
    while (true) {
        std::size_t n_samples = static_cast<std::size_t>(total) * n_per + 1;
        TimeSeries y = device.respond(channel, input, dt, n_samples);
        if (y.samples.size() != n_samples || y.dt != dt)
            throw ScanError("device returned a mismatched waveform at f = " + io::sci(f_hz) +
                            " Hz");
        CorrelationResult res = correlate(y, n_per, cfg.measure_cycles, amplitude);
        if (res.rms_variation <= kTargetVariation) return res.gain;
        if (2 * total > cfg.max_total_cycles) {
            if (res.rms_variation <= 0.01) return res.gain;
            throw ScanError("response not stationary at f = " + io::sci(f_hz) +
                            " Hz after " + std::to_string(total) +
                            " cycles (period RMS variation " + io::sci(res.rms_variation) + ")");
        }
        total *= 2;
    }
}

JacobianScan run_jacobian_scan(const BlackBoxDevice& device, const ScanConfig& cfg) {
    cfg.validate();
    bool want_ptheta = device.supports(ScanChannel::theta_to_p);
    bool want_qv = device.supports(ScanChannel::v_to_q);
    require(want_ptheta || want_qv,
            "device supports neither the theta->P nor the V->Q channel");

    JacobianScan scan;
    if (want_ptheta) scan.p_theta.emplace();
    if (want_qv) scan.q_v.emplace();

    int consecutive_failures = 0;
    for (double f : cfg.frequencies_hz) {
        try {
            Complex gp, gq;
            if (want_ptheta) gp = sine_perturb_extract(device, ScanChannel::theta_to_p, f, cfg);
            if (want_qv) gq = sine_perturb_extract(device, ScanChannel::v_to_q, f, cfg);
            scan.frequencies_hz.push_back(f);
            if (want_ptheta) scan.p_theta->push_back(gp);
            if (want_qv) scan.q_v->push_back(gq);
            consecutive_failures = 0;
        } catch (const ScanError& e) {
            scan.warnings.emplace_back(e.what());
            if (++consecutive_failures >= 3) {
                std::string msg = "scan aborted after 3 consecutive failures:";
                for (const auto& w : scan.warnings) msg += "\n  " + w;
                throw std::runtime_error(msg);
            }
        }
    }
    if (scan.frequencies_hz.empty()) throw std::runtime_error("scan produced no usable points");
    scan.validate();
    return scan;
}

double linearity_certificate(const BlackBoxDevice& device, ScanChannel channel, double f_hz,
                             const ScanConfig& cfg, double factor) {
    require(factor > 1.0, "linearity factor must exceed 1");
    ScanConfig small = cfg;
    small.amplitude = cfg.amplitude / factor;
    Complex g1 = sine_perturb_extract(device, channel, f_hz, cfg);
    Complex g2 = sine_perturb_extract(device, channel, f_hz, small);
    double ref = std::abs(g1);
    return ref > 0.0 ? std::abs(g2 - g1) / ref : std::abs(g2 - g1);
}

namespace {

void append_complex_cols(std::string& header, const char* base, bool present) {
    if (!present) return;
    header += ',';
    header += base;
    header += "_re,";
    header += base;
    header += "_im";
}

std::optional<std::vector<Complex>> read_complex_cols(const io::CsvTable& table, const char* base) {
    std::string re = std::string(base) + "_re", im = std::string(base) + "_im";
    bool has_re = table.has_column(re), has_im = table.has_column(im);
    if (has_re != has_im)
        throw std::runtime_error("scan CSV has only one of " + re + "/" + im);
    if (!has_re) return std::nullopt;
    std::size_t ci = table.column(re), cq = table.column(im);
    std::vector<Complex> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.emplace_back(row[ci], row[cq]);
    return out;
}

}  // namespace

void save_scan(const JacobianScan& scan, const std::filesystem::path& path) {
    scan.validate();
    std::string out = "f_hz";
    append_complex_cols(out, "ptheta", scan.p_theta.has_value());
    append_complex_cols(out, "qv", scan.q_v.has_value());
    append_complex_cols(out, "pv", scan.p_v.has_value());
    append_complex_cols(out, "qtheta", scan.q_theta.has_value());
    out += '\n';
    for (std::size_t i = 0; i < scan.frequencies_hz.size(); ++i) {
        out += io::sci(scan.frequencies_hz[i]);
        auto emit = [&](const std::optional<std::vector<Complex>>& a) {
            if (!a) return;
            out += ',';
            out += io::sci((*a)[i].real());
            out += ',';
            out += io::sci((*a)[i].imag());
        };
        emit(scan.p_theta);
        emit(scan.q_v);
        emit(scan.p_v);
        emit(scan.q_theta);
        out += '\n';
    }
    io::atomic_write(path, out);
}

JacobianScan load_scan(const std::filesystem::path& path) {
    io::CsvTable table = io::read_csv(path);
    std::size_t fc = table.column("f_hz");
    JacobianScan scan;
    scan.frequencies_hz.reserve(table.rows.size());
    for (const auto& row : table.rows) scan.frequencies_hz.push_back(row[fc]);
    scan.p_theta = read_complex_cols(table, "ptheta");
    scan.q_v = read_complex_cols(table, "qv");
    scan.p_v = read_complex_cols(table, "pv");
    scan.q_theta = read_complex_cols(table, "qtheta");
    if (!scan.p_theta && !scan.q_v)
        throw std::runtime_error(path.string() + ": scan has neither ptheta nor qv columns");
    if (scan.p_theta && !scan.q_v)
        scan.warnings.push_back("scan contains p_theta only (no q_v columns)");
    if (scan.q_v && !scan.p_theta)
        scan.warnings.push_back("scan contains q_v only (no p_theta columns)");
    try {
        scan.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return scan;
}

void save_admittance(const AdmittanceScan& scan, const std::filesystem::path& path) {
    scan.validate();
    std::string out = "f_hz,ydd_re,ydd_im,ydq_re,ydq_im,yqd_re,yqd_im,yqq_re,yqq_im\n";
    for (std::size_t i = 0; i < scan.frequencies_hz.size(); ++i) {
        out += io::sci(scan.frequencies_hz[i]);
        for (const auto* arr : {&scan.y_dd, &scan.y_dq, &scan.y_qd, &scan.y_qq}) {
            out += ',';
            out += io::sci((*arr)[i].real());
            out += ',';
            out += io::sci((*arr)[i].imag());
        }
        out += '\n';
    }
    io::atomic_write(path, out);
}

AdmittanceScan load_admittance(const std::filesystem::path& path) {
    io::CsvTable table = io::read_csv(path);
    AdmittanceScan scan;
    std::size_t fc = table.column("f_hz");
    for (const auto& row : table.rows) scan.frequencies_hz.push_back(row[fc]);
    auto grab = [&](const char* base) {
        auto v = read_complex_cols(table, base);
        if (!v) throw std::runtime_error(path.string() + ": missing columns for " + base);
        return *v;
    };
    scan.y_dd = grab("ydd");
    scan.y_dq = grab("ydq");
    scan.y_qd = grab("yqd");
    scan.y_qq = grab("yqq");
    scan.validate();
    return scan;
}

namespace {

Polynomial poly_from_string(const std::string& text, const std::string& key) {
    std::vector<double> coeffs;
    for (const auto& tok : io::split(text, ' ')) {
        std::string t = io::trim(tok);
        if (t.empty()) continue;
        coeffs.push_back(io::parse_double(t, "device spec key '" + key + "'"));
    }
    if (coeffs.empty())
        throw std::runtime_error("device spec key '" + key + "' has no coefficients");
    return Polynomial(std::move(coeffs));
}

constexpr struct {
    ScanChannel channel;
    const char* key;
} kTfChannelKeys[] = {
    {ScanChannel::theta_to_p, "p_theta"},
    {ScanChannel::v_to_q, "q_v"},
    {ScanChannel::v_to_p, "p_v"},
    {ScanChannel::theta_to_q, "q_theta"},
};

}  // namespace

DeviceSpec device_from_doc(const io::TextDoc& doc) {
    std::string type = doc.get("type");
    DeviceSpec spec;
    if (type == "droop") {
        DroopParams params{doc.get_double("d"), doc.get_double("t_f"), doc.get_double("x_coup")};
        params.validate();
        spec.device = std::make_unique<DroopGfmiDevice>(params);
        spec.analytic.emplace(ScanChannel::theta_to_p, droop_p_theta(params));
        return spec;
    }
    if (type == "vsbi") {
        IdealVsbiParams params;
        params.r = doc.get_double_or("r", 0.0);
        params.op.omega_0 = doc.get_double_or("omega0", kOmega60Hz);
        if (doc.has("l"))
            params.l = doc.get_double("l");
        else if (doc.has("x"))
            params.l = doc.get_double("x") / params.op.omega_0;
        else
            throw std::runtime_error("vsbi device spec needs 'l' (inductance) or 'x' (reactance)");
        params.op.p0 = doc.get_double_or("p0", 0.0);
        params.op.q0 = doc.get_double_or("q0", 0.0);
        params.op.v0 = doc.get_double_or("v0", 1.0);
        params.validate();
        PowerScale scale = PowerScale::three_halves;
        if (const std::string* s = doc.find("scale"); s && *s == "unity") scale = PowerScale::unity;
        spec.device = std::make_unique<TransferFunctionDevice>(make_vsbi_device(params, scale));
        spec.analytic.emplace(ScanChannel::theta_to_p, ideal_vsbi_p_theta_tf(params, scale));
        spec.analytic.emplace(ScanChannel::v_to_q, ideal_vsbi_q_v_tf(params, scale));
        return spec;
    }
    if (type == "tf") {
        auto dev = std::make_unique<TransferFunctionDevice>();
        for (const auto& [channel, key] : kTfChannelKeys) {
            std::string num_key = std::string(key) + "_num", den_key = std::string(key) + "_den";
            bool has_num = doc.has(num_key), has_den = doc.has(den_key);
            if (has_num != has_den)
                throw std::runtime_error("device spec has only one of " + num_key + "/" + den_key);
            if (!has_num) continue;
            TransferFunction tf(poly_from_string(doc.get(num_key), num_key),
                                poly_from_string(doc.get(den_key), den_key));
            if (!tf.proper())
                throw std::runtime_error("device channel " + std::string(key) +
                                         " is improper (numerator degree exceeds denominator)");
            dev->set_channel(channel, tf);
            spec.analytic.emplace(channel, std::move(tf));
        }
        if (spec.analytic.empty())
            throw std::runtime_error("tf device spec defines no channels");
        spec.device = std::move(dev);
        return spec;
    }
    throw std::runtime_error("unknown device type '" + type + "' (expected droop, vsbi, tf)");
}

DeviceSpec load_device_spec(const std::filesystem::path& path) {
    return device_from_doc(io::TextDoc::load(path));
}

}  // namespace gfc
