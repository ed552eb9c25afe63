#include "gfc/compliance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gfc/io.hpp"
#include "gfc/svg.hpp"

namespace gfc {

namespace {

constexpr double kMarginGuardDb = 1e-9;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

const std::vector<Complex>& scan_channel_values(const JacobianScan& scan, Channel channel) {
    if (channel == Channel::p_over_theta) {
        require(scan.p_theta.has_value(), "scan does not contain the P/theta channel");
        return *scan.p_theta;
    }
    require(scan.q_v.has_value(), "scan does not contain the Q/V channel");
    return *scan.q_v;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::incomplete: return "INCOMPLETE";
    }
    return {};
}

ComplianceReport check_compliance(const JacobianScan& scan, const ComplianceEnvelope& env,
                                  double tolerance_db) {
    scan.validate();
    require(tolerance_db >= 0.0, "tolerance_db must be nonnegative");
    const std::vector<Complex>& values = scan_channel_values(scan, env.channel);

    ComplianceReport report;
    report.channel = env.channel;
    report.f_lo_hz = env.f_lo_hz;
    report.f_hi_hz = env.f_hi_hz;
    report.tolerance_db = tolerance_db;
    report.worst_margin_db = std::numeric_limits<double>::infinity();
    report.worst_frequency_hz = std::numeric_limits<double>::quiet_NaN();

    bool any_violation = false;
    for (std::size_t i = 0; i < scan.frequencies_hz.size(); ++i) {
        double f = scan.frequencies_hz[i];
        if (f < env.f_lo_hz * (1.0 - 1e-12) || f > env.f_hi_hz * (1.0 + 1e-12)) continue;
        double mag = std::abs(values[i]);
        double env_min = env.min_magnitude_at(f);
        double margin = 20.0 * std::log10(mag / env_min);
        report.per_point.push_back({f, mag, env_min, margin});
        if (margin < report.worst_margin_db) {
            report.worst_margin_db = margin;
            report.worst_frequency_hz = f;
        }
        if (margin < -tolerance_db - kMarginGuardDb) any_violation = true;
    }

    report.coverage_ok = report.per_point.size() >= 10 &&
                         scan.frequencies_hz.front() <= env.f_lo_hz * 1.1 &&
                         scan.frequencies_hz.back() >= env.f_hi_hz * 0.9;

    if (any_violation)
        report.verdict = Verdict::fail;
    else if (!report.coverage_ok)
        report.verdict = Verdict::incomplete;
    else
        report.verdict = Verdict::pass;
    return report;
}

namespace {

// First return of a step response to the zero baseline after it has left it.
std::optional<double> decay_after_departure(const TimeSeries& y) {
    double peak = 0.0;
    for (double v : y.samples) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return std::nullopt;
    std::size_t k0 = 0;
    while (k0 < y.samples.size() && std::abs(y.samples[k0]) <= 1e-9 * peak) ++k0;
    if (k0 >= y.samples.size()) return std::nullopt;
    for (std::size_t k = k0; k + 1 < y.samples.size(); ++k) {
        double a = y.samples[k], b = y.samples[k + 1];
        if (b == 0.0) return y.time_at(k + 1);
        if (a * b < 0.0) return y.time_at(k) + y.dt * a / (a - b);
    }
    return std::nullopt;
}

}  // namespace

EquivalenceReport time_domain_crosscheck(const TransferFunction& device_tf,
                                         const TimeDomainCriteria& criteria,
                                         const CrosscheckOptions& opt) {
    criteria.validate();
    require(device_tf.proper(), "device transfer function must be proper or biproper");

    double sigma_min = std::numeric_limits<double>::infinity();
    double pole_max = 0.0;
    if (device_tf.den.degree() >= 1) {
        std::string pole_list;
        bool unstable = false;
        for (const Complex& p : polynomial_roots(device_tf.den)) {
            pole_list += " (" + io::sci(p.real()) + ", " + io::sci(p.imag()) + ")";
            if (p.real() >= -1e-12) unstable = true;
            sigma_min = std::min(sigma_min, -p.real());
            pole_max = std::max(pole_max, std::abs(p));
        }
        if (unstable)
            throw std::invalid_argument("device is not stable; poles:" + pole_list);
    }

    double t_end = 20.0 * criteria.rise_time_max_s;
    if (std::isfinite(sigma_min)) t_end = std::max(t_end, 35.0 / sigma_min);
    if (criteria.decay_time_min_s) t_end = std::max(t_end, 3.0 * *criteria.decay_time_min_s);
    t_end = std::max(t_end, 0.1);

    double dt = criteria.rise_time_max_s / 500.0;
    if (pole_max > 0.0) dt = std::min(dt, 1.0 / (200.0 * pole_max));
    dt = std::max(dt, t_end / 4e6);  // sample-count ceiling; RK4 substeps keep accuracy

    TimeSeries y = step_response(device_tf, t_end, dt);

    EquivalenceReport report{};
    report.rise_time_s = rise_time_10_90(y);
    report.rise_time_0_90_s = rise_time_0_90(y);
    report.peak = peak_value(y, 0.0);
    report.decay_time_s = decay_after_departure(y);

    double tol = opt.metric_rel_tol;
    bool rise_ok = report.rise_time_s <= criteria.rise_time_max_s * (1.0 + tol);
    bool peak_ok = std::abs(report.peak) >= criteria.peak_min * (1.0 - tol);
    bool decay_ok = true;
    if (criteria.decay_time_min_s && report.decay_time_s)
        decay_ok = *report.decay_time_s >= *criteria.decay_time_min_s * (1.0 - tol);
    report.td_verdict = (rise_ok && peak_ok && decay_ok) ? Verdict::pass : Verdict::fail;

    ComplianceEnvelope env = build_envelope(criteria, opt.envelope);
    std::vector<double> grid(opt.fd_grid_points);
    double llo = std::log(env.f_lo_hz), lhi = std::log(env.f_hi_hz);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                     static_cast<double>(grid.size() - 1));
    grid.front() = env.f_lo_hz;
    grid.back() = env.f_hi_hz;
    FrequencyResponse fr = freq_response(device_tf, grid);

    JacobianScan scan;
    scan.frequencies_hz = std::move(grid);
    if (criteria.channel == Channel::p_over_theta)
        scan.p_theta = std::move(fr.values);
    else
        scan.q_v = std::move(fr.values);

    report.fd_report = check_compliance(scan, env, opt.tolerance_db);
    report.fd_verdict = report.fd_report.verdict;
    report.consistent = report.td_verdict == report.fd_verdict;
    return report;
}

std::string render_text(const ComplianceReport& report) {
    std::string out;
    out += "channel:   " + to_string(report.channel) + "\n";
    out += "verdict:   " + to_string(report.verdict) + "\n";
    out += "band:      [" + io::sci(report.f_lo_hz) + ", " + io::sci(report.f_hi_hz) + "] Hz\n";
    out += "points:    " + std::to_string(report.per_point.size()) + " in band\n";
    out += "coverage:  " + std::string(report.coverage_ok ? "ok" : "insufficient") + "\n";
    out += "tolerance: " + io::sci(report.tolerance_db) + " dB\n";
    if (!report.per_point.empty()) {
        out += "worst:     " + io::sci(report.worst_margin_db) + " dB at " +
               io::sci(report.worst_frequency_hz) + " Hz\n";
    }
    return out;
}

std::string render_structured(const ComplianceReport& report) {
    io::TextDoc doc;
    doc.set("channel", to_string(report.channel));
    doc.set("verdict", to_string(report.verdict));
    doc.set("band_hz", io::sci(report.f_lo_hz) + " " + io::sci(report.f_hi_hz));
    doc.set("tolerance_db", report.tolerance_db);
    doc.set("coverage_ok", report.coverage_ok ? "true" : "false");
    if (!report.per_point.empty()) {
        doc.set("worst_margin_db", report.worst_margin_db);
        doc.set("worst_frequency_hz", report.worst_frequency_hz);
    }
    doc.set("points", std::to_string(report.per_point.size()));
    for (std::size_t i = 0; i < report.per_point.size(); ++i) {
        const CompliancePoint& p = report.per_point[i];
        doc.set("point." + std::to_string(i), io::sci(p.f_hz) + " " + io::sci(p.scan_magnitude) +
                                                  " " + io::sci(p.envelope_minimum) + " " +
                                                  io::sci(p.margin_db));
    }
    return doc.to_string();
}

std::string render_csv(const ComplianceReport& report) {
    std::string out = "f_hz,scan_magnitude,envelope_minimum,margin_db\n";
    for (const CompliancePoint& p : report.per_point) {
        out += io::sci(p.f_hz) + "," + io::sci(p.scan_magnitude) + "," +
               io::sci(p.envelope_minimum) + "," + io::sci(p.margin_db) + "\n";
    }
    return out;
}

namespace {

double to_db(double magnitude, double floor_db) {
    if (magnitude <= 0.0) return floor_db;
    return std::max(20.0 * std::log10(magnitude), floor_db);
}

}  // namespace

std::string render_svg(const ComplianceReport& report, const ComplianceEnvelope& env) {
    const int width = 1000, height = 600;
    const double margin_l = 80, margin_r = 30, margin_t = 50, margin_b = 60;
    const double plot_w = width - margin_l - margin_r;
    const double plot_h = height - margin_t - margin_b;

    double lx_lo = std::log10(env.f_lo_hz), lx_hi = std::log10(env.f_hi_hz);

    // Envelope curve sampled on a log grid.
    const std::size_t n_env = 256;
    std::vector<std::pair<double, double>> env_db(n_env);
    double db_min = std::numeric_limits<double>::infinity(), db_max = -db_min;
    for (std::size_t i = 0; i < n_env; ++i) {
        double lx = lx_lo + (lx_hi - lx_lo) * static_cast<double>(i) /
                                static_cast<double>(n_env - 1);
        double mag = env.min_magnitude_at(std::pow(10.0, lx));
        double db = 20.0 * std::log10(mag);
        env_db[i] = {lx, db};
        db_min = std::min(db_min, db);
        db_max = std::max(db_max, db);
    }
    for (const CompliancePoint& p : report.per_point) {
        double db = to_db(p.scan_magnitude, db_min - 20.0);
        db_min = std::min(db_min, db);
        db_max = std::max(db_max, db);
    }
    db_min = std::floor(db_min - 4.0);
    db_max = std::ceil(db_max + 4.0);

    auto px = [&](double lx) { return margin_l + (lx - lx_lo) / (lx_hi - lx_lo) * plot_w; };
    auto py = [&](double db) { return margin_t + (db_max - db) / (db_max - db_min) * plot_h; };

    svg::Document doc(width, height);
    doc.rect(0, 0, width, height, "#ffffff");

    // Shaded non-compliance region: below the envelope boundary.
    std::vector<std::pair<double, double>> shade;
    shade.reserve(n_env + 2);
    for (const auto& [lx, db] : env_db) shade.emplace_back(px(lx), py(db));
    shade.emplace_back(px(lx_hi), margin_t + plot_h);
    shade.emplace_back(px(lx_lo), margin_t + plot_h);
    doc.polygon(shade, "#d62728", "noncompliance-region", 0.15);

    // Axes and ticks.
    doc.line(margin_l, margin_t, margin_l, margin_t + plot_h, "#000000", 1.0);
    doc.line(margin_l, margin_t + plot_h, margin_l + plot_w, margin_t + plot_h, "#000000", 1.0);
    for (int dec = static_cast<int>(std::floor(lx_lo)); dec <= static_cast<int>(std::ceil(lx_hi));
         ++dec) {
        for (double mant : {1.0, 2.0, 5.0}) {
            double lx = dec + std::log10(mant);
            if (lx < lx_lo - 1e-9 || lx > lx_hi + 1e-9) continue;
            double x = px(lx);
            doc.line(x, margin_t + plot_h, x, margin_t + plot_h + 5, "#000000", 1.0);
            char label[32];
            std::snprintf(label, sizeof(label), "%g", mant * std::pow(10.0, dec));
            doc.text(x, margin_t + plot_h + 20, label, 12, "middle");
        }
    }
    double db_step = (db_max - db_min) > 60.0 ? 20.0 : ((db_max - db_min) > 25.0 ? 10.0 : 5.0);
    for (double db = std::ceil(db_min / db_step) * db_step; db <= db_max + 1e-9; db += db_step) {
        double yy = py(db);
        doc.line(margin_l - 5, yy, margin_l, yy, "#000000", 1.0);
        doc.line(margin_l, yy, margin_l + plot_w, yy, "#e0e0e0", 0.5);
        char label[32];
        std::snprintf(label, sizeof(label), "%g", db);
        doc.text(margin_l - 10, yy + 4, label, 12, "end");
    }
    doc.text(margin_l + plot_w / 2, height - 15, "frequency (Hz)", 14, "middle");
    doc.text(18, margin_t + plot_h / 2, "magnitude (dB)", 14, "middle");

    // Envelope boundary.
    std::vector<std::pair<double, double>> boundary;
    boundary.reserve(n_env);
    for (const auto& [lx, db] : env_db) boundary.emplace_back(px(lx), py(db));
    doc.polyline(boundary, "#8c1a1a", 2.0, "envelope-boundary");

    // Scan overlay.
    double tol = report.tolerance_db;
    for (const CompliancePoint& p : report.per_point) {
        double x = px(std::log10(p.f_hz));
        double yy = py(to_db(p.scan_magnitude, db_min));
        bool violation = p.margin_db < -tol - kMarginGuardDb;
        doc.circle(x, yy, 3.0, violation ? "#d62728" : "#1f77b4",
                   violation ? "scan-point violation" : "scan-point pass");
    }

    if (report.verdict == Verdict::fail && !report.per_point.empty()) {
        double x = px(std::log10(report.worst_frequency_hz));
        char note[96];
        std::snprintf(note, sizeof(note), "worst: %.3f dB at %.3f Hz", report.worst_margin_db,
                      report.worst_frequency_hz);
        double y_note = std::max(margin_t + 14.0, py(db_max) + 14.0);
        doc.circle(x, py(to_db(env.min_magnitude_at(report.worst_frequency_hz), db_min)), 6.0,
                   "none", "");
        doc.text(std::min(x, margin_l + plot_w - 180.0), y_note, note, 13, "start", "#d62728");
    }

    doc.text(margin_l, 25, to_string(report.channel) + " compliance: " + to_string(report.verdict),
             16);
    return doc.str();
}

std::filesystem::path write_report(const ComplianceReport& report, const ComplianceEnvelope& env,
                                   ReportFormat format, const std::filesystem::path& out_dir,
                                   const std::string& basename) {
    std::filesystem::path path = out_dir;
    std::string content;
    switch (format) {
        case ReportFormat::text:
            path /= basename + ".txt";
            content = render_text(report);
            break;
        case ReportFormat::structured:
            path /= basename + ".report";
            content = render_structured(report);
            break;
        case ReportFormat::csv:
            path /= basename + ".csv";
            content = render_csv(report);
            break;
        case ReportFormat::svg:
            path /= basename + ".svg";
            content = render_svg(report, env);
            break;
    }
    io::atomic_write(path, content);
    return path;
}

std::string render_text(const EquivalenceReport& report, const TimeDomainCriteria& criteria) {
    std::string out;
    out += "rise time (10-90): " + io::sci(report.rise_time_s) + " s (max " +
           io::sci(criteria.rise_time_max_s) + ")\n";
    out += "rise time (0-90):  " + io::sci(report.rise_time_0_90_s) + " s\n";
    out += "peak:              " + io::sci(report.peak) + " (min " + io::sci(criteria.peak_min) +
           ")\n";
    out += "decay time:        " +
           (report.decay_time_s ? io::sci(*report.decay_time_s) + " s" : std::string("never"));
    if (criteria.decay_time_min_s) out += " (min " + io::sci(*criteria.decay_time_min_s) + ")";
    out += "\n";
    out += "time-domain:       " + to_string(report.td_verdict) + "\n";
    out += "frequency-domain:  " + to_string(report.fd_verdict) + "\n";
    out += "consistent:        " + std::string(report.consistent ? "true" : "false") + "\n";
    return out;
}

std::string render_structured(const EquivalenceReport& report,
                              const TimeDomainCriteria& criteria) {
    io::TextDoc doc;
    doc.set("channel", to_string(criteria.channel));
    doc.set("rise_time_s", report.rise_time_s);
    doc.set("rise_time_0_90_s", report.rise_time_0_90_s);
    doc.set("peak", report.peak);
    doc.set("decay_time_s", report.decay_time_s ? io::sci(*report.decay_time_s)
                                                : std::string("never"));
    doc.set("td_verdict", to_string(report.td_verdict));
    doc.set("fd_verdict", to_string(report.fd_verdict));
    doc.set("consistent", report.consistent ? "true" : "false");
    return doc.to_string();
}

}  // namespace gfc
