#pragma once

// Shared synthetic fixtures built from known spectra, so every expected value
// is available by construction.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "gfc/modal.hpp"

namespace gfc::test {

// Deterministic LCG in [-0.5, 0.5].
class Lcg {
public:
    explicit Lcg(std::uint64_t seed) : state_(seed) {}
    double next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((state_ >> 11) % 1000000) / 1000000.0 - 0.5;
    }

private:
    std::uint64_t state_;
};

struct DemoModel {
    modal::StateSpaceModel model;
    // Constructed spectrum: conjugate pairs listed once with Im > 0.
    std::vector<std::complex<double>> pair_modes;
    std::vector<double> real_modes;
    std::complex<double> weak_mode;  // the deliberately weakly damped pair
};

// 12-state, 3-device fixture: A = T B T^{-1} with B block-diagonal, so the
// spectrum is exactly the block spectrum. The weak 4.8 Hz pair sits in the
// first device's states.
inline DemoModel make_demo_model() {
    DemoModel demo;
    demo.weak_mode = {-2.046, 30.16};
    demo.pair_modes = {demo.weak_mode, {-8.0, 45.0}, {-15.0, 80.0}, {-20.0, 120.0}, {-12.0, 60.0}};
    demo.real_modes = {-30.0, -5.0};

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(12, 12);
    int k = 0;
    for (const auto& m : demo.pair_modes) {
        b(k, k) = m.real();
        b(k, k + 1) = m.imag();
        b(k + 1, k) = -m.imag();
        b(k + 1, k + 1) = m.real();
        k += 2;
    }
    for (double r : demo.real_modes) b(k, k) = r, ++k;

    Lcg rng(42);
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(12, 12);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) t(i, j) += 0.15 * rng.next();

    demo.model.a = t * b * t.inverse();
    demo.model.state_groups["gfm36"] = {0, 1, 2, 3};
    demo.model.state_groups["ibr35"] = {4, 5, 6, 7};
    demo.model.state_groups["ibr34"] = {8, 9, 10, 11};

    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(6, 12);
    c(0, 0) = 1.0; c(0, 4) = 0.1;
    c(1, 1) = 1.0; c(1, 5) = 0.1;
    c(2, 4) = 1.0; c(2, 8) = 0.1;
    c(3, 5) = 1.0; c(3, 9) = 0.1;
    c(4, 8) = 1.0; c(4, 0) = 0.1;
    c(5, 9) = 1.0; c(5, 1) = 0.1;
    demo.model.c = c;
    demo.model.output_pairs["bus36"] = {0, 1};
    demo.model.output_pairs["bus35"] = {2, 3};
    demo.model.output_pairs["bus34"] = {4, 5};
    return demo;
}

// Random dense matrix with a known spectrum, V Lambda V^{-1} real-similarity
// construction as above.
inline Eigen::MatrixXd matrix_with_spectrum(const std::vector<std::complex<double>>& pairs,
                                            const std::vector<double>& reals,
                                            std::uint64_t seed) {
    int n = static_cast<int>(2 * pairs.size() + reals.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    int k = 0;
    for (const auto& m : pairs) {
        b(k, k) = m.real();
        b(k, k + 1) = m.imag();
        b(k + 1, k) = -m.imag();
        b(k + 1, k + 1) = m.real();
        k += 2;
    }
    for (double r : reals) b(k, k) = r, ++k;
    Lcg rng(seed);
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t(i, j) += 0.2 * rng.next();
    return t * b * t.inverse();
}

}  // namespace gfc::test
