#include "gfc/lti.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gfc/io.hpp"

namespace gfc {

namespace {

void trim_trailing_zeros(std::vector<double>& c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_zeta(double zeta) {
    require(zeta > 0.0 && zeta <= 1.0, "zeta must be in (0, 1], got " + std::to_string(zeta));
}

void check_omega(double omega_n) {
    require(omega_n > 0.0, "omega_n must be positive, got " + std::to_string(omega_n));
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

Polynomial::Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) {
    trim_trailing_zeros(coeffs_);
}

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
    trim_trailing_zeros(coeffs_);
}

Complex Polynomial::eval(Complex s) const {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Polynomial::eval(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::operator*(double k) const {
    std::vector<double> c = coeffs_;
    for (double& v : c) v *= k;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    if (is_zero() || other.is_zero()) return {};
    std::vector<double> c(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (std::size_t j = 0; j < other.coeffs_.size(); ++j)
            c[i + j] += coeffs_[i] * other.coeffs_[j];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    std::vector<double> c(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] + other[i];
    return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
    std::vector<double> c(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (*this)[i] - other[i];
    return Polynomial(std::move(c));
}

TransferFunction::TransferFunction(Polynomial numerator, Polynomial denominator)
    : num(std::move(numerator)), den(std::move(denominator)) {
    require(!den.is_zero(), "transfer function denominator must not be the zero polynomial");
}

Complex TransferFunction::eval(Complex s) const {
    Complex d = den.eval(s);
    if (d == Complex(0.0, 0.0))
        throw std::runtime_error("transfer function denominator is zero at s = (" +
                                 io::sci(s.real()) + ", " + io::sci(s.imag()) + ")");
    return num.eval(s) / d;
}

TransferFunction second_order_lpf(const SecondOrderParams& p) {
    check_zeta(p.zeta);
    check_omega(p.omega_n);
    double wn2 = p.omega_n * p.omega_n;
    return TransferFunction(Polynomial{p.gain * wn2}, Polynomial{wn2, 2.0 * p.zeta * p.omega_n, 1.0});
}

TransferFunction second_order_hpf(const SecondOrderParams& p) {
    check_zeta(p.zeta);
    check_omega(p.omega_n);
    double wn2 = p.omega_n * p.omega_n;
    return TransferFunction(Polynomial{0.0, 0.0, p.gain}, Polynomial{wn2, 2.0 * p.zeta * p.omega_n, 1.0});
}

FrequencyResponse freq_response(const TransferFunction& tf, std::span<const double> freqs_hz) {
    require(!freqs_hz.empty(), "frequency grid must not be empty");
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        require(freqs_hz[i] > 0.0, "frequencies must be positive");
        require(i == 0 || freqs_hz[i] > freqs_hz[i - 1], "frequencies must be strictly increasing");
    }
    FrequencyResponse fr;
    fr.frequencies_hz.assign(freqs_hz.begin(), freqs_hz.end());
    fr.values.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        Complex d = tf.den.eval(Complex(0.0, kTwoPi * f));
        if (d == Complex(0.0, 0.0))
            throw std::runtime_error("denominator is zero at f = " + io::sci(f) + " Hz");
        fr.values.push_back(tf.num.eval(Complex(0.0, kTwoPi * f)) / d);
    }
    return fr;
}

std::vector<Complex> polynomial_roots(const Polynomial& p) {
    require(!p.is_zero(), "cannot take roots of the zero polynomial");
    int n = p.degree();
    if (n == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    double lead = p[static_cast<std::size_t>(n)];
    for (int i = 0; i < n; ++i) {
        companion(i, n - 1) = -p[static_cast<std::size_t>(i)] / lead;
        if (i > 0) companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    return roots;
}

namespace {

// Controllable canonical realization of a proper transfer function.
struct StateSpace {
    int n = 0;                 // state dimension
    std::vector<double> alpha; // monic denominator coefficients a_0..a_{n-1}
    std::vector<double> b;     // output row for the strictly proper part
    double d = 0.0;            // feedthrough
};

StateSpace to_state_space(const TransferFunction& tf) {
    require(tf.proper(), "transfer function must be proper or biproper");
    StateSpace ss;
    ss.n = tf.den.degree();
    double lead = tf.den[static_cast<std::size_t>(ss.n)];
    if (tf.num.degree() == tf.den.degree())
        ss.d = tf.num[static_cast<std::size_t>(ss.n)] / lead;
    Polynomial strictly_proper = tf.num - tf.den * ss.d;
    ss.alpha.resize(static_cast<std::size_t>(ss.n));
    ss.b.resize(static_cast<std::size_t>(ss.n));
    for (int i = 0; i < ss.n; ++i) {
        ss.alpha[static_cast<std::size_t>(i)] = tf.den[static_cast<std::size_t>(i)] / lead;
        ss.b[static_cast<std::size_t>(i)] = strictly_proper[static_cast<std::size_t>(i)] / lead;
    }
    return ss;
}

// dx/dt for x' = A x + B u with A companion and B = e_n.
void deriv(const StateSpace& ss, const std::vector<double>& x, double u, std::vector<double>& dx) {
    int n = ss.n;
    for (int i = 0; i + 1 < n; ++i) dx[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i) + 1];
    double acc = u;
    for (int i = 0; i < n; ++i)
        acc -= ss.alpha[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    dx[static_cast<std::size_t>(n - 1)] = acc;
}

double output(const StateSpace& ss, const std::vector<double>& x, double u) {
    double y = ss.d * u;
    for (int i = 0; i < ss.n; ++i) y += ss.b[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
    return y;
}

double max_pole_magnitude(const TransferFunction& tf) {
    if (tf.den.degree() < 1) return 0.0;
    double m = 0.0;
    for (const Complex& r : polynomial_roots(tf.den)) m = std::max(m, std::abs(r));
    return m;
}

}  // namespace

TimeSeries simulate_lti(const TransferFunction& tf, const std::function<double(double)>& input,
                        double dt, std::size_t n_samples, double t0) {
    require(dt > 0.0, "dt must be positive");
    require(n_samples >= 2, "need at least two samples");
    StateSpace ss = to_state_space(tf);

    TimeSeries out;
    out.dt = dt;
    out.t0 = t0;
    out.samples.resize(n_samples);

    if (ss.n == 0) {  // static gain
        for (std::size_t k = 0; k < n_samples; ++k)
            out.samples[k] = ss.d * input(t0 + dt * static_cast<double>(k));
        return out;
    }

    // Substep so the fastest pole is well resolved regardless of the caller's dt.
    double pmax = max_pole_magnitude(tf);
    int substeps = 1;
    if (pmax > 0.0) substeps = std::max(1, static_cast<int>(std::ceil(dt * pmax / 0.1)));
    double h = dt / substeps;

    std::vector<double> x(static_cast<std::size_t>(ss.n), 0.0);
    std::vector<double> k1(x.size()), k2(x.size()), k3(x.size()), k4(x.size()), xt(x.size());

    out.samples[0] = output(ss, x, input(t0));
    for (std::size_t k = 0; k + 1 < n_samples; ++k) {
        double t_base = t0 + dt * static_cast<double>(k);
        for (int s = 0; s < substeps; ++s) {
            double t = t_base + h * s;
            double u0 = input(t);
            double um = input(t + 0.5 * h);
            double u1 = input(t + h);
            deriv(ss, x, u0, k1);
            for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + 0.5 * h * k1[i];
            deriv(ss, xt, um, k2);
            for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + 0.5 * h * k2[i];
            deriv(ss, xt, um, k3);
            for (std::size_t i = 0; i < x.size(); ++i) xt[i] = x[i] + h * k3[i];
            deriv(ss, xt, u1, k4);
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.samples[k + 1] = output(ss, x, input(t_base + dt));
    }
    return out;
}

TimeSeries step_response(const TransferFunction& tf, double t_end, double dt) {
    require(tf.proper(), "step response requires a proper or biproper transfer function");
    require(t_end > 0.0 && dt > 0.0, "t_end and dt must be positive");
    require(dt <= t_end / 100.0, "dt must be at most t_end/100");
    auto n = static_cast<std::size_t>(std::floor(t_end / dt)) + 1;
    return simulate_lti(tf, [](double) { return 1.0; }, dt, n, 0.0);
}

double suggested_step_dt(const TransferFunction& tf) {
    double pmax = max_pole_magnitude(tf);
    return pmax > 0.0 ? 1.0 / (200.0 * pmax) : 1e-3;
}

namespace {

// First time the series crosses `level`, linear interpolation; nullopt if never.
std::optional<double> first_crossing(const TimeSeries& s, double level) {
    if (s.samples.empty()) return std::nullopt;
    if (s.samples[0] == level) return s.t0;
    for (std::size_t k = 0; k + 1 < s.samples.size(); ++k) {
        double a = s.samples[k] - level;
        double b = s.samples[k + 1] - level;
        if (b == 0.0) return s.time_at(k + 1);
        if (a * b < 0.0) return s.time_at(k) + s.dt * a / (a - b);
    }
    return std::nullopt;
}

struct SettledChange {
    double y0;
    double yf;
    double change;
};

SettledChange settled_change(const TimeSeries& series, const char* op_name) {
    require(series.samples.size() >= 2, "series too short");
    double yf = series.samples.back();
    double peak_dev = 0.0;
    for (double v : series.samples) peak_dev = std::max(peak_dev, std::abs(v - yf));
    // 1% band of the final value; fall back to a fraction of the excursion
    // when the series settles to zero.
    double band = 0.01 * std::max(std::abs(yf), 1e-6 * peak_dev);
    std::size_t tail = std::max<std::size_t>(1, series.samples.size() / 20);
    for (std::size_t k = series.samples.size() - tail; k < series.samples.size(); ++k) {
        if (std::abs(series.samples[k] - yf) > band)
            throw std::runtime_error(std::string(op_name) +
                                     ": series has not settled; metric undefined");
    }
    return {series.samples.front(), yf, yf - series.samples.front()};
}

}  // namespace

double rise_time_10_90(const TimeSeries& series) {
    SettledChange sc = settled_change(series, "rise_time_10_90");
    double scale = std::max({std::abs(sc.y0), std::abs(sc.yf), 1e-300});
    if (std::abs(sc.change) <= 1e-12 * scale) return 0.0;  // already at its final value
    auto t10 = first_crossing(series, sc.y0 + 0.1 * sc.change);
    auto t90 = first_crossing(series, sc.y0 + 0.9 * sc.change);
    if (!t10 || !t90 || *t90 < *t10)
        throw std::runtime_error("rise_time_10_90: thresholds not crossed in order");
    return *t90 - *t10;
}

double rise_time_0_90(const TimeSeries& series) {
    SettledChange sc = settled_change(series, "rise_time_0_90");
    double scale = std::max({std::abs(sc.y0), std::abs(sc.yf), 1e-300});
    if (std::abs(sc.change) <= 1e-12 * scale) return 0.0;
    auto t90 = first_crossing(series, sc.y0 + 0.9 * sc.change);
    if (!t90) throw std::runtime_error("rise_time_0_90: 90% threshold never crossed");
    return *t90 - series.t0;
}

double peak_value(const TimeSeries& series, double baseline) {
    require(!series.samples.empty(), "peak_value: empty series");
    double peak = 0.0;
    for (double v : series.samples) peak = std::max(peak, std::abs(v - baseline));
    if (peak == 0.0) return 0.0;
    double sign = 0.0;
    for (double v : series.samples) {
        double d = v - baseline;
        if (std::abs(d) > 1e-12 * peak) {
            sign = d > 0.0 ? 1.0 : -1.0;
            break;
        }
    }
    return sign * peak;
}

double peak_value(const TimeSeries& series) {
    require(!series.samples.empty(), "peak_value: empty series");
    return peak_value(series, series.samples.front());
}

std::optional<double> decay_time_zero_crossing(const TimeSeries& series, double baseline) {
    require(series.samples.size() >= 2, "series too short");
    require(series.samples.front() != baseline, "series must start away from the baseline");
    auto t = first_crossing(series, baseline);
    if (!t) return std::nullopt;
    return *t - series.t0;
}

double rise_time_empirical(double zeta, double omega_n) {
    check_zeta(zeta);
    check_omega(omega_n);
    return (((1.76 * zeta - 0.417) * zeta + 1.039) * zeta + 1.0) / omega_n;
}

double decay_time_empirical(double zeta, double omega_n) {
    check_zeta(zeta);
    check_omega(omega_n);
    return (((-0.09 * zeta + 0.42) * zeta - 0.88) * zeta + 1.56) / omega_n;
}

double decay_time_analytic(double zeta, double omega_n) {
    require(zeta >= 0.0 && zeta <= 1.0, "zeta must be in [0, 1]");
    check_omega(omega_n);
    double phi = std::acos(zeta);
    if (phi < 1e-4) return (1.0 + phi * phi / 6.0) / omega_n;  // series limit at zeta -> 1
    return phi / (std::sin(phi) * omega_n);
}

namespace {

// sqrt(1 - 2 z^2 + sqrt((1 - 2 z^2)^2 + 1)): the -3 dB point of the standard
// LPF sits at omega_n * g, and of the HPF at omega_n / g.
double bandwidth_factor(double zeta) {
    double a = 1.0 - 2.0 * zeta * zeta;
    return std::sqrt(a + std::sqrt(a * a + 1.0));
}

}  // namespace

double bandwidth_lpf_hz(double zeta, double omega_n) {
    check_zeta(zeta);
    check_omega(omega_n);
    return omega_n * bandwidth_factor(zeta) / kTwoPi;
}

double bandwidth_hpf_hz(double zeta, double omega_n) {
    check_zeta(zeta);
    check_omega(omega_n);
    return omega_n / (bandwidth_factor(zeta) * kTwoPi);
}

CubicFit fit_cubic(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit_cubic: x and y must have equal length");
    std::size_t n = x.size();
    require(n >= 5, "fit_cubic: need at least 5 points");
    {
        std::vector<double> xs(x.begin(), x.end());
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < n; ++i)
            require(xs[i] != xs[i + 1], "fit_cubic: x values must be distinct");
    }

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    double scale = std::sqrt(var / static_cast<double>(n));

    Eigen::MatrixXd vand(static_cast<Eigen::Index>(n), 4);
    for (std::size_t i = 0; i < n; ++i) {
        double z = (x[i] - mean) / scale;
        vand(static_cast<Eigen::Index>(i), 0) = 1.0;
        vand(static_cast<Eigen::Index>(i), 1) = z;
        vand(static_cast<Eigen::Index>(i), 2) = z * z;
        vand(static_cast<Eigen::Index>(i), 3) = z * z * z;
    }
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = y[i];

    Eigen::MatrixXd normal = vand.transpose() * vand;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (lu.rank() < 4) throw std::invalid_argument("fit_cubic: rank-deficient design matrix");
    Eigen::VectorXd gamma = lu.solve(vand.transpose() * rhs);

    // Expand sum_k gamma_k ((x - mean)/scale)^k back to plain powers of x.
    Polynomial zpoly{-mean / scale, 1.0 / scale};
    Polynomial acc{gamma(0)};
    Polynomial zpow{1.0};
    for (int k = 1; k <= 3; ++k) {
        zpow = zpow * zpoly;
        acc = acc + zpow * gamma(k);
    }

    CubicFit fit{};
    fit.c0 = acc[0];
    fit.c1 = acc[1];
    fit.c2 = acc[2];
    fit.c3 = acc[3];

    double ss_res = 0.0, ss_tot = 0.0, ymean = 0.0;
    for (double v : y) ymean += v;
    ymean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = (x[i] - mean) / scale;
        double pred = ((gamma(3) * z + gamma(2)) * z + gamma(1)) * z + gamma(0);
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ymean) * (y[i] - ymean);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.adjusted_r_squared =
        1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / static_cast<double>(n - 4);
    fit.rmse = std::sqrt(ss_res / static_cast<double>(n));
    return fit;
}

void save_time_series(const TimeSeries& series, const std::filesystem::path& path) {
    require(series.dt > 0.0 && !series.samples.empty(), "invalid series");
    std::string out = "t_s,value\n";
    for (std::size_t k = 0; k < series.samples.size(); ++k)
        out += io::sci(series.time_at(k)) + "," + io::sci(series.samples[k]) + "\n";
    io::atomic_write(path, out);
}

TimeSeries load_time_series(const std::filesystem::path& path) {
    io::CsvTable table = io::read_csv(path);
    std::size_t tc = table.column("t_s"), vc = table.column("value");
    if (table.rows.size() < 2)
        throw std::runtime_error(path.string() + ": need at least two samples");
    TimeSeries series;
    series.t0 = table.rows[0][tc];
    series.dt = table.rows[1][tc] - series.t0;
    if (series.dt <= 0.0) throw std::runtime_error(path.string() + ": time column must increase");
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double expected = series.t0 + series.dt * static_cast<double>(i);
        if (std::abs(table.rows[i][tc] - expected) > 1e-6 * series.dt + 1e-12)
            throw std::runtime_error(path.string() + " row " + std::to_string(i + 1) +
                                     ": non-uniform sampling");
        series.samples.push_back(table.rows[i][vc]);
    }
    return series;
}

void save_frequency_response(const FrequencyResponse& fr, const std::filesystem::path& path) {
    require(fr.frequencies_hz.size() == fr.values.size() && !fr.values.empty(),
            "invalid frequency response");
    std::string out = "f_hz,re,im\n";
    for (std::size_t i = 0; i < fr.values.size(); ++i)
        out += io::sci(fr.frequencies_hz[i]) + "," + io::sci(fr.values[i].real()) + "," +
               io::sci(fr.values[i].imag()) + "\n";
    io::atomic_write(path, out);
}

FrequencyResponse load_frequency_response(const std::filesystem::path& path) {
    io::CsvTable table = io::read_csv(path);
    std::size_t fc = table.column("f_hz"), rc = table.column("re"), ic = table.column("im");
    FrequencyResponse fr;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        double f = table.rows[i][fc];
        if (f <= 0.0 || (!fr.frequencies_hz.empty() && f <= fr.frequencies_hz.back()))
            throw std::runtime_error(path.string() + " row " + std::to_string(i + 1) +
                                     ": frequencies must be positive and strictly increasing");
        fr.frequencies_hz.push_back(f);
        fr.values.emplace_back(table.rows[i][rc], table.rows[i][ic]);
    }
    if (fr.values.empty()) throw std::runtime_error(path.string() + ": empty response");
    return fr;
}

TimeSeries moving_average(const TimeSeries& series, double window_s) {
    require(series.dt > 0.0 && series.samples.size() >= 2, "invalid series");
    require(window_s >= series.dt, "window must be at least one sample interval");
    auto n_win = static_cast<std::size_t>(std::llround(window_s / series.dt));
    n_win = std::max<std::size_t>(1, n_win);

    const auto& y = series.samples;
    std::vector<long double> prefix(y.size() + 1, 0.0L);
    for (std::size_t k = 0; k < y.size(); ++k) prefix[k + 1] = prefix[k] + y[k];

    TimeSeries out;
    out.dt = series.dt;
    out.t0 = series.t0;
    out.samples.resize(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        std::size_t lo = k + 1 >= n_win ? k + 1 - n_win : 0;
        long double sum = prefix[k + 1] - prefix[lo];
        std::size_t missing = n_win - (k + 1 - lo);
        sum += static_cast<long double>(missing) * y.front();
        out.samples[k] = static_cast<double>(sum / static_cast<long double>(n_win));
    }
    return out;
}

}  // namespace gfc
