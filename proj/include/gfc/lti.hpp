#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace gfc {

using Complex = std::complex<double>;

/// Real polynomial in the Laplace variable, coefficients in ascending powers.
/// Trailing zero coefficients are trimmed so the leading coefficient of a
/// nonzero polynomial is always nonzero.
class Polynomial {
public:
    Polynomial() = default;  // the zero polynomial
    Polynomial(std::initializer_list<double> ascending);
    explicit Polynomial(std::vector<double> ascending);

    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }

    /// Coefficient of s^i (0 beyond the stored degree).
    double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    Complex eval(Complex s) const;
    double eval(double x) const;

    Polynomial operator*(double k) const;
    Polynomial operator*(const Polynomial& other) const;
    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;

private:
    std::vector<double> coeffs_;
};

/// Proper or biproper rational transfer function H(s) = num(s)/den(s).
struct TransferFunction {
    Polynomial num;
    Polynomial den;

    TransferFunction(Polynomial numerator, Polynomial denominator);

    bool proper() const { return num.degree() <= den.degree(); }
    bool biproper() const { return num.degree() == den.degree(); }

    /// Throws std::runtime_error if den(s) evaluates to zero.
    Complex eval(Complex s) const;
};

struct FrequencyResponse {
    std::vector<double> frequencies_hz;  // strictly increasing, all > 0
    std::vector<Complex> values;
};

/// Uniformly sampled real signal.
struct TimeSeries {
    double dt = 0.0;
    double t0 = 0.0;
    std::vector<double> samples;

    double time_at(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
};

struct SecondOrderParams {
    double zeta;     // damping ratio, (0, 1]
    double omega_n;  // natural frequency, rad/s
    double gain;     // DC gain (LPF) / high-frequency gain (HPF)
};

/// K * wn^2 / (s^2 + 2*zeta*wn*s + wn^2)
TransferFunction second_order_lpf(const SecondOrderParams& p);
/// K * s^2 / (s^2 + 2*zeta*wn*s + wn^2)
TransferFunction second_order_hpf(const SecondOrderParams& p);

/// H(j*2*pi*f) on a strictly increasing positive frequency grid.
FrequencyResponse freq_response(const TransferFunction& tf, std::span<const double> freqs_hz);

/// All roots via the companion-matrix eigenvalues.
std::vector<Complex> polynomial_roots(const Polynomial& p);

/// Simulates y = H(s) u for an arbitrary input signal, sampled every dt from
/// t0. The integrator is classic fixed-step RK4 on the controllable canonical
/// realization, substepping internally when dt is coarse relative to the
/// fastest pole; biproper feedthrough is applied algebraically.
TimeSeries simulate_lti(const TransferFunction& tf, const std::function<double(double)>& input,
                        double dt, std::size_t n_samples, double t0 = 0.0);

/// Unit-step response on [0, t_end]. Requires dt <= t_end/100.
TimeSeries step_response(const TransferFunction& tf, double t_end, double dt);

/// dt from the fastest pole (1/(200*max|p|)); fallback for static gains.
double suggested_step_dt(const TransferFunction& tf);

/// 10%->90% traversal time of the change from the first sample to the final
/// value, linear interpolation between samples. Requires the series to have
/// settled (last 5% of samples within a 1% band of the final value).
double rise_time_10_90(const TimeSeries& series);
/// Time from t0 to first reaching 90% of the same change.
double rise_time_0_90(const TimeSeries& series);

/// Largest absolute deviation from the baseline, signed by the direction of
/// the first significant deviation. Step responses of biproper systems should
/// pass baseline 0 (the pre-disturbance value is not part of the series).
double peak_value(const TimeSeries& series, double baseline);
double peak_value(const TimeSeries& series);  // baseline = first sample

/// First crossing of the baseline (linear interpolation); nullopt = never.
std::optional<double> decay_time_zero_crossing(const TimeSeries& series, double baseline);

/// (1.76 z^3 - 0.417 z^2 + 1.039 z + 1) / omega_n, zeta in (0, 1].
double rise_time_empirical(double zeta, double omega_n);
/// (-0.09 z^3 + 0.42 z^2 - 0.88 z + 1.56) / omega_n, zeta in (0, 1].
double decay_time_empirical(double zeta, double omega_n);
/// Exact first zero of the second-order HPF unit-step response:
/// acos(zeta)/(omega_n*sqrt(1-zeta^2)), continuous limit 1/omega_n at zeta=1.
double decay_time_analytic(double zeta, double omega_n);

/// -3 dB bandwidth of the standard second-order filters, in hertz.
double bandwidth_lpf_hz(double zeta, double omega_n);
double bandwidth_hpf_hz(double zeta, double omega_n);

struct CubicFit {
    double c3, c2, c1, c0;  // y = c3 x^3 + c2 x^2 + c1 x + c0
    double r_squared;
    double adjusted_r_squared;
    double rmse;  // sqrt(SS_res / n)

    double eval(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
};

/// Least-squares cubic via normal equations on a centered/scaled abscissa.
/// Requires >= 5 points with distinct x values.
CubicFit fit_cubic(std::span<const double> x, std::span<const double> y);

/// Causal boxcar average over the trailing window; history before t0 is
/// assumed equal to the first sample. Requires window >= dt.
TimeSeries moving_average(const TimeSeries& series, double window_s);

/// CSV: t_s,value
void save_time_series(const TimeSeries& series, const std::filesystem::path& path);
TimeSeries load_time_series(const std::filesystem::path& path);

/// CSV: f_hz,re,im
void save_frequency_response(const FrequencyResponse& fr, const std::filesystem::path& path);
FrequencyResponse load_frequency_response(const std::filesystem::path& path);

}  // namespace gfc
