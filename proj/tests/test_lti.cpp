#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "gfc/lti.hpp"

using namespace gfc;

namespace {

constexpr double kPi = std::numbers::pi;

TimeSeries ideal_step(double dt, std::size_t n, std::size_t step_at = 1) {
    TimeSeries s;
    s.dt = dt;
    s.samples.assign(n, 1.0);
    for (std::size_t k = 0; k < step_at && k < n; ++k) s.samples[k] = 0.0;
    return s;
}

}  // namespace

TEST_CASE("Polynomial basics") {
    Polynomial p{1.0, 2.0, 0.0, 3.0, 0.0, 0.0};
    CHECK(p.degree() == 3);
    CHECK(p[0] == 1.0);
    CHECK(p[3] == 3.0);
    CHECK(p[7] == 0.0);
    CHECK(p.eval(2.0) == doctest::Approx(1.0 + 4.0 + 24.0));

    Polynomial zero;
    CHECK(zero.is_zero());
    CHECK(zero.degree() == -1);
    CHECK(Polynomial{0.0, 0.0}.is_zero());

    Polynomial prod = Polynomial{1.0, 1.0} * Polynomial{-1.0, 1.0};
    CHECK(prod.degree() == 2);
    CHECK(prod[0] == doctest::Approx(-1.0));
    CHECK(prod[1] == doctest::Approx(0.0));
    CHECK(prod[2] == doctest::Approx(1.0));
}

TEST_CASE("TransferFunction rejects zero denominator") {
    CHECK_THROWS_AS(TransferFunction(Polynomial{1.0}, Polynomial{}), std::invalid_argument);
}

TEST_CASE("freq_response") {
    // Boundary LPF built from the AEMO criteria (15 ms rise, 0.2 p.u. per 10 deg).
    double peak = 0.2 / (10.0 * kPi / 180.0);
    double wn = rise_time_empirical(1.0, 1.0) / 0.015;
    TransferFunction lp = second_order_lpf({1.0, wn, peak});

    SUBCASE("DC limit equals the gain") {
        auto fr = freq_response(lp, std::vector<double>{1e-6});
        CHECK(std::abs(fr.values[0]) == doctest::Approx(peak).epsilon(1e-9));
        CHECK(std::abs(fr.values[0]) == doctest::Approx(1.1458).epsilon(1.3e-4));
    }

    SUBCASE("magnitude at the -3 dB bandwidth") {
        auto fr = freq_response(lp, std::vector<double>{23.09});
        CHECK(std::abs(fr.values[0]) == doctest::Approx(peak / std::sqrt(2.0)).epsilon(0.005));
    }

    SUBCASE("biproper high-frequency limit") {
        TransferFunction hp = second_order_hpf({1.0, 10.0, 1.0});
        auto fr = freq_response(hp, std::vector<double>{1e4});
        CHECK(std::abs(fr.values[0]) == doctest::Approx(1.0).epsilon(1e-4));
    }

    SUBCASE("evaluation error names the frequency") {
        // Pure oscillator: denominator vanishes exactly at f = 1/(2*pi).
        TransferFunction osc(Polynomial{1.0}, Polynomial{1.0, 0.0, 1.0});
        CHECK_THROWS_WITH_AS(freq_response(osc, std::vector<double>{1.0 / (2.0 * kPi)}),
                             doctest::Contains("1.591549430919"), std::runtime_error);
    }

    SUBCASE("grid validation") {
        CHECK_THROWS_AS(freq_response(lp, std::vector<double>{1.0, 1.0}), std::invalid_argument);
        CHECK_THROWS_AS(freq_response(lp, std::vector<double>{-1.0}), std::invalid_argument);
    }
}

TEST_CASE("step_response") {
    SUBCASE("first-order analytic value") {
        TransferFunction tf(Polynomial{1.0}, Polynomial{1.0, 1.0});
        TimeSeries y = step_response(tf, 2.0, 1e-4);
        auto idx = static_cast<std::size_t>(std::llround(1.0 / y.dt));
        CHECK(y.samples[idx] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-4));
    }

    SUBCASE("biproper feedthrough at t=0 and first zero crossing at 1/wn") {
        TransferFunction tf(Polynomial{0.0, 0.0, 1.0}, Polynomial{100.0, 20.0, 1.0});
        TimeSeries y = step_response(tf, 1.0, 1e-4);
        CHECK(y.samples[0] == doctest::Approx(1.0));
        auto cross = decay_time_zero_crossing(y, 0.0);
        REQUIRE(cross.has_value());
        CHECK(std::abs(*cross - 0.100) < 1e-3);
    }

    SUBCASE("improper transfer function rejected") {
        TransferFunction tf(Polynomial{0.0, 0.0, 1.0}, Polynomial{1.0, 1.0});
        CHECK_THROWS_AS(step_response(tf, 1.0, 1e-3), std::invalid_argument);
    }

    SUBCASE("dt precondition") {
        TransferFunction tf(Polynomial{1.0}, Polynomial{1.0, 1.0});
        CHECK_THROWS_AS(step_response(tf, 1.0, 0.5), std::invalid_argument);
    }
}

TEST_CASE("rise_time_10_90") {
    SUBCASE("critically compliant boundary filter rises in 15 ms") {
        double wn = 225.47;
        TimeSeries y = step_response(second_order_lpf({1.0, wn, 1.0}), 0.2, 1.0 / (200.0 * wn));
        CHECK(rise_time_10_90(y) == doctest::Approx(0.015).epsilon(0.02));
    }

    SUBCASE("ideal step has zero rise time") {
        TimeSeries s = ideal_step(1e-6, 2000);
        CHECK(rise_time_10_90(s) < 1e-6 + 1e-12);
    }

    SUBCASE("moving average of an ideal step rises in 0.8 W") {
        double window = 16.67e-3;
        TimeSeries s = ideal_step(1e-5, 20000, 1000);
        TimeSeries f = moving_average(s, window);
        CHECK(rise_time_10_90(f) == doctest::Approx(0.8 * window).epsilon(0.01));
    }

    SUBCASE("non-settling series rejected") {
        TimeSeries ramp;
        ramp.dt = 1e-3;
        for (int i = 0; i < 1000; ++i) ramp.samples.push_back(1e-3 * i);
        CHECK_THROWS_AS(rise_time_10_90(ramp), std::runtime_error);
    }
}

TEST_CASE("peak_value") {
    double peak = 0.2 / (10.0 * kPi / 180.0);
    double wn = rise_time_empirical(1.0, 1.0) / 0.015;

    SUBCASE("boundary LPF step peaks at its steady gain") {
        TimeSeries y = step_response(second_order_lpf({1.0, wn, peak}), 0.2, 1.0 / (200.0 * wn));
        CHECK(peak_value(y) == doctest::Approx(1.1458).epsilon(0.01));
    }

    SUBCASE("constant series has zero peak") {
        TimeSeries s;
        s.dt = 1e-3;
        s.samples.assign(100, 3.7);
        CHECK(peak_value(s) == 0.0);
    }

    SUBCASE("HPF feedthrough dominates, measured from the pre-step baseline") {
        TransferFunction hp(Polynomial{0.0, 0.0, 1.0}, Polynomial{100.0, 20.0, 1.0});
        TimeSeries y = step_response(hp, 1.0, 1e-4);
        CHECK(peak_value(y, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("decay_time_zero_crossing") {
    SUBCASE("critically damped HPF crosses at 1/wn") {
        TimeSeries y = step_response(second_order_hpf({1.0, 10.0, 1.0}), 1.0, 5e-5);
        auto t = decay_time_zero_crossing(y, 0.0);
        REQUIRE(t.has_value());
        CHECK(std::abs(*t - 0.100) < 1e-3);
    }

    SUBCASE("zeta -> 0 approaches the quarter period") {
        TimeSeries y = step_response(second_order_hpf({1e-6, 1.0, 1.0}), 3.0, 1e-3);
        auto t = decay_time_zero_crossing(y, 0.0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(kPi / 2.0).epsilon(0.01));
    }

    SUBCASE("monotone series never crossing") {
        TimeSeries s;
        s.dt = 1e-3;
        for (int i = 0; i < 100; ++i) s.samples.push_back(1.0 + 1e-3 * i);
        CHECK(!decay_time_zero_crossing(s, 0.0).has_value());
    }
}

TEST_CASE("rise_time_empirical") {
    CHECK(rise_time_empirical(1.0, 1.0) == doctest::Approx(3.382).epsilon(1e-12));
    CHECK(rise_time_empirical(1.0, 225.4666666666667) == doctest::Approx(0.015).epsilon(1e-3));
    CHECK(rise_time_empirical(0.5, 1.0) == doctest::Approx(1.63525).epsilon(1e-9));

    SUBCASE("agrees with the simulated 10-90 rise time") {
        TimeSeries y = step_response(second_order_lpf({0.5, 1.0, 1.0}), 25.0, 1.0 / 200.0);
        CHECK(rise_time_empirical(0.5, 1.0) == doctest::Approx(rise_time_10_90(y)).epsilon(0.01));
    }

    CHECK_THROWS_AS(rise_time_empirical(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rise_time_empirical(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("decay_time_empirical") {
    CHECK(decay_time_empirical(1.0, 1.0) == doctest::Approx(1.01).epsilon(1e-12));
    CHECK(decay_time_empirical(1.0, 10.1) == doctest::Approx(0.100).epsilon(1e-12));
    CHECK(decay_time_empirical(0.5, 1.0) == doctest::Approx(1.21375).epsilon(1e-9));
    CHECK(decay_time_empirical(0.5, 1.0) ==
          doctest::Approx(decay_time_analytic(0.5, 1.0)).epsilon(0.01));
    CHECK_THROWS_AS(decay_time_empirical(-0.1, 1.0), std::invalid_argument);
}

TEST_CASE("decay_time_analytic") {
    CHECK(decay_time_analytic(1.0, 10.0) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(decay_time_analytic(0.0, 1.0) == doctest::Approx(kPi / 2.0).epsilon(1e-12));

    SUBCASE("matches the simulated zero crossing") {
        double expected = std::acos(0.7) / (2.0 * kPi * std::sqrt(1.0 - 0.49));
        CHECK(decay_time_analytic(0.7, 2.0 * kPi) == doctest::Approx(expected).epsilon(1e-12));
        TimeSeries y = step_response(second_order_hpf({0.7, 2.0 * kPi, 1.0}), 2.0, 1e-4);
        auto t = decay_time_zero_crossing(y, 0.0);
        REQUIRE(t.has_value());
        CHECK(decay_time_analytic(0.7, 2.0 * kPi) == doctest::Approx(*t).epsilon(0.002));
    }

    SUBCASE("continuous at zeta = 1") {
        CHECK(decay_time_analytic(1.0 - 1e-9, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

namespace {

// Independent least-squares oracle: raw (uncentered) normal equations solved
// by Gaussian elimination with partial pivoting.
std::vector<double> brute_cubic(const std::vector<double>& x, const std::vector<double>& y) {
    double m[4][5] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p[4] = {1.0, x[i], x[i] * x[i], x[i] * x[i] * x[i]};
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) m[r][c] += p[r] * p[c];
            m[r][4] += p[r] * y[i];
        }
    }
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        for (int c = 0; c < 5; ++c) std::swap(m[col][c], m[piv][c]);
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            double f = m[r][col] / m[col][col];
            for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]};
}

}  // namespace

TEST_CASE("fit_cubic") {
    SUBCASE("exact cubic is recovered") {
        std::vector<double> x, y;
        for (int i = 0; i < 40; ++i) {
            double v = -1.0 + i * 0.05;
            x.push_back(v);
            y.push_back(0.5 * v * v * v - 2.0 * v * v + 3.0 * v - 4.0);
        }
        CubicFit f = fit_cubic(x, y);
        CHECK(f.c3 == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(f.c2 == doctest::Approx(-2.0).epsilon(1e-10));
        CHECK(f.c1 == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(f.c0 == doctest::Approx(-4.0).epsilon(1e-10));
        CHECK(f.rmse <= 1e-10);
    }

    SUBCASE("quartic data: R^2 < 1 and residuals match an independent solve") {
        std::vector<double> x, y;
        for (int i = 0; i < 100; ++i) {
            double v = i / 99.0;
            x.push_back(v);
            y.push_back(v * v * v * v);
        }
        CubicFit f = fit_cubic(x, y);
        CHECK(f.r_squared < 1.0);
        auto c = brute_cubic(x, y);
        double ss_a = 0.0, ss_b = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double pa = f.eval(x[i]);
            double pb = ((c[3] * x[i] + c[2]) * x[i] + c[1]) * x[i] + c[0];
            ss_a += (y[i] - pa) * (y[i] - pa);
            ss_b += (y[i] - pb) * (y[i] - pb);
            CHECK(std::abs(pa - pb) < 1e-9);
        }
        CHECK(std::abs(ss_a - ss_b) < 1e-9);
    }

    SUBCASE("decay-time fit reproduces the boundary-construction coefficients") {
        // Simulated zero-crossing times over the moderately damped range.
        std::vector<double> x, y;
        for (int i = 0; i < 50; ++i) {
            double z = 0.45 + 0.55 * i / 49.0;
            TimeSeries resp = step_response(second_order_hpf({z, 1.0, 1.0}), 4.0, 1.0 / 250.0);
            auto t = decay_time_zero_crossing(resp, 0.0);
            REQUIRE(t.has_value());
            x.push_back(z);
            y.push_back(*t);
        }
        CubicFit f = fit_cubic(x, y);
        CHECK(std::abs(f.c3 - (-0.09)) <= 0.02);
        CHECK(std::abs(f.c2 - 0.42) <= 0.02);
        CHECK(std::abs(f.c1 - (-0.88)) <= 0.02);
        CHECK(std::abs(f.c0 - 1.56) <= 0.02);
        CHECK(f.r_squared >= 0.99);
        CHECK(f.adjusted_r_squared >= 0.99);
    }

    SUBCASE("preconditions") {
        std::vector<double> x{0.0, 1.0, 2.0, 3.0};
        std::vector<double> y{0.0, 1.0, 2.0, 3.0};
        CHECK_THROWS_AS(fit_cubic(x, y), std::invalid_argument);  // too few points
        std::vector<double> xd{0.0, 1.0, 1.0, 2.0, 3.0};
        std::vector<double> yd{0.0, 1.0, 1.0, 2.0, 3.0};
        CHECK_THROWS_AS(fit_cubic(xd, yd), std::invalid_argument);  // duplicate x
    }
}

TEST_CASE("bandwidths") {
    CHECK(bandwidth_lpf_hz(1.0, 225.4666666666667) == doctest::Approx(23.09).epsilon(0.005));
    CHECK(bandwidth_lpf_hz(1.0 / std::sqrt(2.0), 42.0) ==
          doctest::Approx(42.0 / (2.0 * kPi)).epsilon(1e-9));
    CHECK(bandwidth_hpf_hz(1.0, 10.0) == doctest::Approx(2.47).epsilon(0.005));

    SUBCASE("magnitude at the computed bandwidth equals gain/sqrt(2)") {
        for (double z : {0.3, 0.7, 1.0}) {
            for (double wn : {1.0, 50.0, 300.0}) {
                TransferFunction lp = second_order_lpf({z, wn, 2.5});
                double fb = bandwidth_lpf_hz(z, wn);
                CHECK(std::abs(lp.eval(Complex(0.0, 2.0 * kPi * fb))) ==
                      doctest::Approx(2.5 / std::sqrt(2.0)).epsilon(0.005));
                TransferFunction hp = second_order_hpf({z, wn, 2.5});
                double fh = bandwidth_hpf_hz(z, wn);
                CHECK(std::abs(hp.eval(Complex(0.0, 2.0 * kPi * fh))) ==
                      doctest::Approx(2.5 / std::sqrt(2.0)).epsilon(0.005));
            }
        }
    }
}

TEST_CASE("moving_average") {
    SUBCASE("constant series is unchanged") {
        TimeSeries s;
        s.dt = 1e-3;
        s.samples.assign(500, 2.0);
        TimeSeries f = moving_average(s, 20e-3);
        for (double v : f.samples) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("window below dt rejected") {
        TimeSeries s;
        s.dt = 1e-3;
        s.samples.assign(10, 0.0);
        CHECK_THROWS_AS(moving_average(s, 1e-4), std::invalid_argument);
    }

    SUBCASE("measured rise times grow strictly with the window") {
        // Fast second-order response filtered through one-cycle-class windows.
        double wn = 2000.0;
        TimeSeries y = step_response(second_order_lpf({0.7, wn, 1.0}), 0.08, 2e-6);
        std::vector<double> rises;
        for (double w : {4e-3, 8e-3, 16.67e-3})
            rises.push_back(rise_time_10_90(moving_average(y, w)));
        CHECK(rises[0] < rises[1]);
        CHECK(rises[1] < rises[2]);
    }

    SUBCASE("mean of a periodic signal is preserved") {
        TimeSeries s;
        s.dt = 1e-3;
        const std::size_t per = 50;  // window = exactly 4 periods
        for (std::size_t i = 0; i < 2000; ++i)
            s.samples.push_back(0.3 + std::sin(2.0 * kPi * (i % per) / per));
        TimeSeries f = moving_average(s, 4 * per * s.dt);
        for (std::size_t i = 4 * per; i < f.samples.size(); ++i)
            CHECK(std::abs(f.samples[i] - 0.3) < 1e-9);
    }
}

TEST_CASE("empirical rise formula tracks simulation across zeta") {
    for (int i = 0; i < 10; ++i) {
        double z = 0.1 + 0.9 * i / 9.0;
        TimeSeries y = step_response(second_order_lpf({z, 1.0, 1.0}), 14.0 / z, 1.0 / 200.0);
        double sim = rise_time_10_90(y);
        CHECK(std::abs(rise_time_empirical(z, 1.0) - sim) / sim < 0.05);
    }
}

TEST_CASE("empirical decay formula tracks the analytic oracle") {
    for (int i = 0; i <= 95; ++i) {
        double z = 0.05 + 0.95 * i / 95.0;
        double ana = decay_time_analytic(z, 1.0);
        CHECK(std::abs(decay_time_empirical(z, 1.0) - ana) / ana < 0.02);
    }
}

TEST_CASE("analytic decay matches simulation across zeta and omega_n") {
    for (double z : {0.2, 0.5, 0.8, 1.0}) {
        for (double wn : {1.0, 10.0, 100.0}) {
            TimeSeries y = step_response(second_order_hpf({z, wn, 1.0}), 3.0 / wn, 1.0 / (300.0 * wn));
            auto t = decay_time_zero_crossing(y, 0.0);
            REQUIRE(t.has_value());
            CHECK(std::abs(decay_time_analytic(z, wn) - *t) / *t < 0.005);
        }
    }
}

TEST_CASE("critically damped HPF step crosses zero exactly once") {
    TimeSeries y = step_response(second_order_hpf({1.0, 10.0, 2.0}), 3.0, 1e-4);
    int sign_changes = 0;
    bool crossed = false;
    for (std::size_t k = 0; k + 1 < y.samples.size(); ++k) {
        if (y.samples[k] * y.samples[k + 1] < 0.0) {
            ++sign_changes;
            crossed = true;
        }
        if (crossed) CHECK(y.samples[k + 1] <= 1e-9 * 2.0);
    }
    CHECK(sign_changes == 1);
}
