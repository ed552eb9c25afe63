#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfc/io.hpp"
#include "gfc/jacobian.hpp"
#include "gfc/lti.hpp"

namespace gfc {

enum class ScanChannel { theta_to_p, v_to_q, v_to_p, theta_to_q };

std::string to_string(ScanChannel c);

/// Per-frequency extraction failure, annotated with the frequency.
struct ScanError : std::runtime_error {
    explicit ScanError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Opaque linear device under test. Implementations must be stateless per
/// call (respond is const) so frequency points can run independently. The
/// perturbation is passed as an analytic signal so integrators can evaluate
/// it at interior stage times.
class BlackBoxDevice {
public:
    virtual ~BlackBoxDevice() = default;
    virtual bool supports(ScanChannel channel) const = 0;
    /// Output waveform (P or Q deviation) sampled every dt from t = 0.
    virtual TimeSeries respond(ScanChannel channel, const std::function<double(double)>& input,
                               double dt, std::size_t n_samples) const = 0;
};

/// Device realized by per-channel rational transfer functions.
class TransferFunctionDevice : public BlackBoxDevice {
public:
    void set_channel(ScanChannel channel, TransferFunction tf);
    const TransferFunction* channel(ScanChannel c) const;

    bool supports(ScanChannel channel) const override;
    TimeSeries respond(ScanChannel channel, const std::function<double(double)>& input, double dt,
                       std::size_t n_samples) const override;

private:
    std::map<ScanChannel, TransferFunction> channels_;
};

/// Built-in droop GFMI outer loop, integrated in the time domain:
///   P_m = (theta_C - theta_POI)/X_coup,  theta_C' = -D x_f,
///   x_f' = (P_m - x_f)/T_f.
class DroopGfmiDevice : public BlackBoxDevice {
public:
    explicit DroopGfmiDevice(DroopParams params);

    bool supports(ScanChannel channel) const override;  // theta_to_p only
    TimeSeries respond(ScanChannel channel, const std::function<double(double)>& input, double dt,
                       std::size_t n_samples) const override;

    const DroopParams& params() const { return params_; }

private:
    DroopParams params_;
    int substeps_for(double dt) const;
};

/// Ideal VSBI wired as a black box through its rational closed forms.
TransferFunctionDevice make_vsbi_device(const IdealVsbiParams& params,
                                        PowerScale scale = PowerScale::three_halves);

struct ScanConfig {
    std::vector<double> frequencies_hz = default_grid();
    double amplitude = 0.01;   // rad for theta inputs, p.u. for V inputs
    int settle_cycles = 0;     // 0 = auto: 10 cycles below 5 Hz, 5 above
    int measure_cycles = 5;
    double dt = 0.0;           // 0 = auto: 1/(50 * max grid frequency)
    double z_test = 0.0;       // this version supports only a direct POI scan
    int max_total_cycles = 400;

    void validate() const;
    double effective_dt() const;
    /// 40 log-spaced points, 0.5-60 Hz.
    static std::vector<double> default_grid();
    static std::vector<double> log_grid(double f_min, double f_max, std::size_t n);
};

/// Applies config-file keys (f_min/f_max/n_points rebuild the grid; amplitude,
/// settle_cycles, measure_cycles, dt, max_total_cycles override fields).
ScanConfig apply_config_doc(ScanConfig base, const io::TextDoc& doc);

/// Injects A sin(2 pi f t), discards settle cycles, and correlates the
/// response with sin/cos over whole measurement periods. The dwell is
/// extended geometrically until the period-to-period RMS variation falls
/// below 0.1%; above 1% after the cycle budget it is a convergence error.
Complex sine_perturb_extract(const BlackBoxDevice& device, ScanChannel channel, double f_hz,
                             const ScanConfig& cfg);

/// p_theta / q_v over the grid for the channels the device supports. Failed
/// frequencies are skipped with a warning; three consecutive failures abort.
JacobianScan run_jacobian_scan(const BlackBoxDevice& device, const ScanConfig& cfg);

/// Relative gain deviation between cfg.amplitude and cfg.amplitude/factor.
double linearity_certificate(const BlackBoxDevice& device, ScanChannel channel, double f_hz,
                             const ScanConfig& cfg, double factor = 10.0);

/// CSV: f_hz,ptheta_re,ptheta_im,qv_re,qv_im[,pv_re,pv_im,qtheta_re,qtheta_im]
/// with absent entry pairs omitted from the header.
void save_scan(const JacobianScan& scan, const std::filesystem::path& path);
JacobianScan load_scan(const std::filesystem::path& path);

/// CSV: f_hz,ydd_re,ydd_im,ydq_re,ydq_im,yqd_re,yqd_im,yqq_re,yqq_im
void save_admittance(const AdmittanceScan& scan, const std::filesystem::path& path);
AdmittanceScan load_admittance(const std::filesystem::path& path);

/// A device plus the analytic per-channel transfer functions, when known.
struct DeviceSpec {
    std::unique_ptr<BlackBoxDevice> device;
    std::map<ScanChannel, TransferFunction> analytic;
};

/// Structured-text device description (type = droop | vsbi | tf).
DeviceSpec device_from_doc(const io::TextDoc& doc);
DeviceSpec load_device_spec(const std::filesystem::path& path);

}  // namespace gfc
