#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gfc/compliance.hpp"
#include "gfc/envelope.hpp"
#include "gfc/io.hpp"
#include "gfc/modal.hpp"
#include "gfc/scan.hpp"

namespace fs = std::filesystem;
using namespace gfc;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;
constexpr int kExitIncomplete = 3;

struct CriteriaFlags {
    std::string preset;
    double rise_ms = 0.0;
    double peak = 0.0;
    double decay_ms = 0.0;
    double zeta = 1.0;
    double zeta_hpf = 1.0;
    std::string channel = "p-theta";

    void attach(CLI::App* cmd) {
        auto* p = cmd->add_option("--preset", preset,
                                  "criteria preset: aemo-p, miso-p, ercot-p, ercot-q");
        auto* r = cmd->add_option("--rise-ms", rise_ms, "maximum rise time, ms");
        cmd->add_option("--peak", peak, "minimum peak value (p.u./rad or p.u./p.u.)");
        cmd->add_option("--decay-ms", decay_ms, "minimum decay time, ms (omit for LP-only)");
        cmd->add_option("--zeta", zeta, "LPF boundary damping ratio (default 1)");
        cmd->add_option("--zeta-hpf", zeta_hpf, "HPF boundary damping ratio (default 1)");
        cmd->add_option("--channel", channel, "p-theta or q-v (explicit criteria only)");
        p->excludes(r);
        r->excludes(p);
    }

    TimeDomainCriteria resolve() const {
        if (!preset.empty()) {
            TimeDomainCriteria c = preset_criteria(preset_from_string(preset));
            return c;
        }
        if (rise_ms <= 0.0 || peak <= 0.0)
            throw std::invalid_argument("need --preset, or --rise-ms and --peak");
        TimeDomainCriteria c;
        c.channel = channel_from_string(channel);
        c.rise_time_max_s = rise_ms * 1e-3;
        c.peak_min = peak;
        if (decay_ms > 0.0) c.decay_time_min_s = decay_ms * 1e-3;
        c.zeta_lpf = zeta;
        c.zeta_hpf = zeta_hpf;
        c.validate();
        return c;
    }
};

struct OutputFlags {
    std::string out_dir = ".";
    std::string format = "all";

    void attach(CLI::App* cmd) {
        cmd->add_option("--out-dir", out_dir, "output directory (default .)");
        cmd->add_option("--format", format, "csv, svg, structured, or all")
            ->check(CLI::IsMember({"csv", "svg", "structured", "all"}));
    }

    bool wants(const std::string& f) const { return format == "all" || format == f; }

    fs::path dir() const {
        fs::path d(out_dir);
        fs::create_directories(d);
        return d;
    }
};

std::string render_envelope_only_svg(const ComplianceEnvelope& env) {
    ComplianceReport empty;
    empty.channel = env.channel;
    empty.verdict = Verdict::pass;
    empty.f_lo_hz = env.f_lo_hz;
    empty.f_hi_hz = env.f_hi_hz;
    empty.coverage_ok = false;
    empty.tolerance_db = 0.0;
    return render_svg(empty, env);
}

int cmd_envelope(const CriteriaFlags& crit, const OutputFlags& out, double floor_hz,
                 std::size_t points) {
    TimeDomainCriteria criteria = crit.resolve();
    EnvelopeOptions opt;
    opt.lp_only_floor_hz = floor_hz;
    ComplianceEnvelope env = build_envelope(criteria, opt);
    fs::path dir = out.dir();
    write_envelope_metadata(env, criteria, dir / "envelope.meta");
    if (out.wants("csv")) write_envelope_csv(env, points, dir / "envelope.csv");
    if (out.wants("svg")) io::atomic_write(dir / "envelope.svg", render_envelope_only_svg(env));

    std::printf("channel:  %s\n", to_string(env.channel).c_str());
    std::printf("f_lo_hz:  %s\n", io::sci(env.f_lo_hz).c_str());
    if (env.f_int_hz) std::printf("f_int_hz: %s\n", io::sci(*env.f_int_hz).c_str());
    std::printf("f_hi_hz:  %s\n", io::sci(env.f_hi_hz).c_str());
    return kExitPass;
}

int cmd_check(const std::string& scan_path, const CriteriaFlags& crit, const OutputFlags& out,
              double tolerance_db, double floor_hz) {
    TimeDomainCriteria criteria = crit.resolve();
    EnvelopeOptions eopt;
    eopt.lp_only_floor_hz = floor_hz;
    ComplianceEnvelope env = build_envelope(criteria, eopt);
    JacobianScan scan = load_scan(scan_path);
    for (const auto& w : scan.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    ComplianceReport report = check_compliance(scan, env, tolerance_db);
    fs::path dir = out.dir();
    if (out.wants("csv")) write_report(report, env, ReportFormat::csv, dir, "report");
    if (out.wants("structured")) write_report(report, env, ReportFormat::structured, dir, "report");
    if (out.wants("svg")) write_report(report, env, ReportFormat::svg, dir, "report");
    std::fputs(render_text(report).c_str(), stdout);

    switch (report.verdict) {
        case Verdict::pass: return kExitPass;
        case Verdict::fail: return kExitFail;
        case Verdict::incomplete: return kExitIncomplete;
    }
    return kExitError;
}

void check_scannable(const DeviceSpec& spec) {
    for (const auto& [channel, tf] : spec.analytic) {
        if (tf.den.degree() < 1) continue;
        std::string poles;
        bool bad = false;
        for (const Complex& p : polynomial_roots(tf.den)) {
            poles += " (" + io::sci(p.real()) + ", " + io::sci(p.imag()) + ")";
            if (p.real() >= -1e-12) bad = true;
        }
        if (bad)
            throw std::invalid_argument("device channel " + to_string(channel) +
                                        " is not strictly stable; poles:" + poles);
    }
}

struct ScanCliOverrides {
    double f_min = 0.5, f_max = 60.0;
    std::size_t n_points = 40;
    double amplitude = 0.01, dt = 0.0;
    int settle_cycles = 0, measure_cycles = 5;
    bool has_f_min = false, has_f_max = false, has_n_points = false;
    bool has_amplitude = false, has_dt = false, has_settle = false, has_measure = false;
};

// Precedence: CLI flags > config file > built-in defaults.
int cmd_scan(const std::string& device_path, const std::string& config_path,
             const OutputFlags& out, const std::string& out_name, const ScanCliOverrides& cli) {
    DeviceSpec spec = load_device_spec(device_path);
    check_scannable(spec);
    ScanConfig cfg;
    if (!config_path.empty()) cfg = apply_config_doc(cfg, io::TextDoc::load(config_path));
    if (cli.has_f_min || cli.has_f_max || cli.has_n_points) {
        double lo = cli.has_f_min ? cli.f_min : cfg.frequencies_hz.front();
        double hi = cli.has_f_max ? cli.f_max : cfg.frequencies_hz.back();
        std::size_t n = cli.has_n_points ? cli.n_points : cfg.frequencies_hz.size();
        cfg.frequencies_hz = ScanConfig::log_grid(lo, hi, n);
    }
    if (cli.has_amplitude) cfg.amplitude = cli.amplitude;
    if (cli.has_dt) cfg.dt = cli.dt;
    if (cli.has_settle) cfg.settle_cycles = cli.settle_cycles;
    if (cli.has_measure) cfg.measure_cycles = cli.measure_cycles;
    cfg.validate();

    JacobianScan scan = run_jacobian_scan(*spec.device, cfg);
    for (const auto& w : scan.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    fs::path path = out.dir() / out_name;
    save_scan(scan, path);
    std::printf("wrote %s (%zu points)\n", path.string().c_str(), scan.frequencies_hz.size());
    return kExitPass;
}

int cmd_verify(const std::string& device_path, const CriteriaFlags& crit, const OutputFlags& out,
               double tolerance_db, double floor_hz) {
    TimeDomainCriteria criteria = crit.resolve();
    DeviceSpec spec = load_device_spec(device_path);
    ScanChannel wanted = criteria.channel == Channel::p_over_theta ? ScanChannel::theta_to_p
                                                                   : ScanChannel::v_to_q;
    auto it = spec.analytic.find(wanted);
    if (it == spec.analytic.end())
        throw std::invalid_argument("device spec has no " + to_string(wanted) +
                                    " channel for this criteria");

    CrosscheckOptions opt;
    opt.tolerance_db = tolerance_db;
    opt.envelope.lp_only_floor_hz = floor_hz;
    EquivalenceReport report = time_domain_crosscheck(it->second, criteria, opt);

    fs::path dir = out.dir();
    io::atomic_write(dir / "verify.report", render_structured(report, criteria));
    if (out.wants("csv")) {
        ComplianceEnvelope env = build_envelope(criteria, opt.envelope);
        write_report(report.fd_report, env, ReportFormat::csv, dir, "verify_fd");
    }
    if (out.wants("svg")) {
        ComplianceEnvelope env = build_envelope(criteria, opt.envelope);
        write_report(report.fd_report, env, ReportFormat::svg, dir, "verify_fd");
    }
    std::fputs(render_text(report, criteria).c_str(), stdout);

    return (report.consistent && report.td_verdict == Verdict::pass) ? kExitPass : kExitFail;
}

int cmd_modal(const std::string& bundle_path, const OutputFlags& out) {
    modal::StateSpaceModel model = modal::load_state_space(bundle_path);
    modal::ModeSet set = modal::compute_modes(model);
    modal::sort_by_damping(set);
    if (set.modes.empty()) throw std::runtime_error("model has no modes");

    fs::path dir = out.dir();
    std::string modes_csv = "rank,re,im,frequency_hz,damping_pct,conjugate_pair,residual\n";
    for (std::size_t i = 0; i < set.modes.size(); ++i) {
        const modal::Mode& m = set.modes[i];
        modes_csv += std::to_string(i) + "," + io::sci(m.lambda.real()) + "," +
                     io::sci(m.lambda.imag()) + "," + io::sci(m.frequency_hz) + "," +
                     io::sci(m.damping_pct) + "," + (m.conjugate_pair ? "1" : "0") + "," +
                     io::sci(m.residual) + "\n";
    }
    io::atomic_write(dir / "modes.csv", modes_csv);

    const modal::Mode& worst = set.modes.front();
    modal::ParticipationReport part = modal::participation_factors(model, worst);
    std::string part_csv = "device,raw,normalized\n";
    for (const auto& [name, raw] : part.raw)
        part_csv += name + "," + io::sci(raw) + "," + io::sci(part.normalized.at(name)) + "\n";
    io::atomic_write(dir / "participation.csv", part_csv);

    modal::ObservabilityReport obs = modal::modal_observability(model, worst);
    std::string obs_csv = "bus,observability\n";
    for (const auto& [bus, value] : obs.per_bus)
        obs_csv += bus + "," + io::sci(value) + "\n";
    io::atomic_write(dir / "observability.csv", obs_csv);

    io::TextDoc meta;
    meta.set("n_states", std::to_string(model.a.rows()));
    meta.set("n_modes", std::to_string(set.modes.size()));
    meta.set("eigenvector_condition", set.eigenvector_condition);
    meta.set("decomposition_reliable", set.reliable ? "true" : "false");
    meta.set("worst_mode_re", worst.lambda.real());
    meta.set("worst_mode_im", worst.lambda.imag());
    meta.set("worst_mode_frequency_hz", worst.frequency_hz);
    meta.set("worst_mode_damping_pct", worst.damping_pct);
    io::atomic_write(dir / "modal.meta", meta.to_string());

    std::printf("%zu modes; worst damping %.4f%% at %.4f Hz%s\n", set.modes.size(),
                worst.damping_pct, worst.frequency_hz,
                set.reliable ? "" : " (defective decomposition: participation unreliable)");
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid-forming frequency-domain compliance toolkit"};
    app.require_subcommand(1);

    OutputFlags out;
    double tolerance_db = 0.0;
    double floor_hz = 1.0;

    // envelope
    auto* envelope_cmd =
        app.add_subcommand("envelope", "build a minimum Bode-magnitude compliance envelope");
    CriteriaFlags env_crit;
    env_crit.attach(envelope_cmd);
    out.attach(envelope_cmd);
    std::size_t env_points = 200;
    envelope_cmd->add_option("--points", env_points, "CSV sample count (default 200)");
    envelope_cmd->add_option("--floor-hz", floor_hz, "LP-only envelope lower edge (default 1)");

    // check
    auto* check_cmd = app.add_subcommand("check", "check a Jacobian scan against an envelope");
    CriteriaFlags check_crit;
    check_crit.attach(check_cmd);
    out.attach(check_cmd);
    std::string scan_file;
    check_cmd->add_option("--scan", scan_file, "Jacobian scan CSV")->required();
    check_cmd->add_option("--tolerance-db", tolerance_db, "margin tolerance in dB (default 0)");
    check_cmd->add_option("--floor-hz", floor_hz, "LP-only envelope lower edge (default 1)");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "extract Jacobian entries from a device spec");
    out.attach(scan_cmd);
    std::string device_file, config_file, scan_out = "scan.csv";
    ScanConfig scan_cfg;
    double f_min = 0.5, f_max = 60.0;
    std::size_t n_points = 40;
    scan_cmd->add_option("--device", device_file, "device spec file")->required();
    scan_cmd->add_option("--config", config_file, "scan config file");
    scan_cmd->add_option("--out", scan_out, "output CSV name (default scan.csv)");
    auto* fmin_opt = scan_cmd->add_option("--f-min", f_min, "grid start, Hz");
    auto* fmax_opt = scan_cmd->add_option("--f-max", f_max, "grid end, Hz");
    auto* npts_opt = scan_cmd->add_option("--n-points", n_points, "grid size");
    scan_cmd->add_option("--amplitude", scan_cfg.amplitude, "perturbation amplitude");
    scan_cmd->add_option("--dt", scan_cfg.dt, "sample interval, s (0 = auto)");
    scan_cmd->add_option("--settle-cycles", scan_cfg.settle_cycles, "settle cycles (0 = auto)");
    scan_cmd->add_option("--measure-cycles", scan_cfg.measure_cycles, "measurement cycles");

    // verify
    auto* verify_cmd =
        app.add_subcommand("verify", "time-domain vs frequency-domain equivalence check");
    CriteriaFlags verify_crit;
    verify_crit.attach(verify_cmd);
    out.attach(verify_cmd);
    std::string verify_device;
    verify_cmd->add_option("--device", verify_device, "device spec file")->required();
    verify_cmd->add_option("--tolerance-db", tolerance_db, "margin tolerance in dB (default 0)");
    verify_cmd->add_option("--floor-hz", floor_hz, "LP-only envelope lower edge (default 1)");

    // modal
    auto* modal_cmd = app.add_subcommand("modal", "small-signal modal analysis of a bundle");
    out.attach(modal_cmd);
    std::string bundle_file;
    modal_cmd->add_option("--bundle", bundle_file, "state-space bundle file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitError;
    }

    try {
        if (envelope_cmd->parsed()) return cmd_envelope(env_crit, out, floor_hz, env_points);
        if (check_cmd->parsed())
            return cmd_check(scan_file, check_crit, out, tolerance_db, floor_hz);
        if (scan_cmd->parsed()) {
            bool grid_override = fmin_opt->count() || fmax_opt->count() || npts_opt->count();
            return cmd_scan(device_file, config_file, out, scan_out, scan_cfg, grid_override,
                            f_min, f_max, n_points);
        }
        if (verify_cmd->parsed())
            return cmd_verify(verify_device, verify_crit, out, tolerance_db, floor_hz);
        if (modal_cmd->parsed()) return cmd_modal(bundle_file, out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitError;
}
