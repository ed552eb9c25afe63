#pragma once

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gfc::modal {

using Complex = std::complex<double>;

/// Dense small-signal model: x' = A x, bus-voltage outputs y = C x, with
/// device-grouped states and (vD, vQ) output rows per bus.
struct StateSpaceModel {
    Eigen::MatrixXd a;  // N x N, 1/s
    Eigen::MatrixXd c;  // M x N
    std::map<std::string, std::vector<int>> state_groups;
    std::map<std::string, std::pair<int, int>> output_pairs;

    void validate() const;  // square A, disjoint in-range groups, in-range pairs
};

struct Mode {
    Complex lambda;
    double frequency_hz;  // |Im(lambda)| / 2 pi
    double damping_pct;   // 100 (-Re)/|lambda|; NaN for lambda == 0
    Eigen::VectorXcd right_vec;  // psi
    Eigen::VectorXcd left_vec;   // phi, with phi^T psi = 1
    bool conjugate_pair;  // reported once with Im > 0
    double residual;      // ||A psi - lambda psi|| / (||A||_F ||psi||)
};

struct ModeSet {
    std::vector<Mode> modes;
    double eigenvector_condition;
    bool reliable;  // condition <= 1e12; participation unreliable otherwise
};

std::optional<double> damping_ratio_pct(Complex lambda);  // nullopt at lambda = 0

/// Full eigen-decomposition; left eigenvectors come from the inverse of the
/// right-eigenvector matrix, so biorthonormality phi_i^T psi_j = delta_ij
/// holds by construction. Conjugate pairs are reported once (Im > 0).
ModeSet compute_modes(const StateSpaceModel& model);

/// Ascending damping, NaN (zero eigenvalues) last.
void sort_by_damping(ModeSet& set);

struct ParticipationReport {
    std::map<std::string, double> raw;         // sum_k |phi_k psi_k| over the device states
    std::map<std::string, double> normalized;  // raw / max(raw)
    std::vector<std::string> empty_groups;
};

ParticipationReport participation_factors(const StateSpaceModel& model, const Mode& mode);

struct ObservabilityReport {
    std::map<std::string, double> per_bus;  // sqrt(|obs_vD|^2 + |obs_vQ|^2), obs = C psi
};

ObservabilityReport modal_observability(const StateSpaceModel& model, const Mode& mode);

/// Bundle file: "key = value" header (n_states, n_outputs, "group <name>",
/// "output_pair <bus>") followed by "matrix A" / "matrix C" CSV blocks.
StateSpaceModel load_state_space(const std::filesystem::path& path);
void save_state_space(const StateSpaceModel& model, const std::filesystem::path& path);

}  // namespace gfc::modal
