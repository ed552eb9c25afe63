#include "gfc/modal.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gfc/io.hpp"

namespace gfc::modal {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void StateSpaceModel::validate() const {
    require(a.rows() > 0 && a.rows() == a.cols(), "A must be square and nonempty");
    require(a.allFinite(), "A must have finite entries");
    require(c.rows() == 0 || c.cols() == a.cols(), "C column count must match A");
    require(c.allFinite(), "C must have finite entries");
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(c.rows());
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (const auto& [name, idxs] : state_groups) {
        for (int k : idxs) {
            require(k >= 0 && k < n, "state group '" + name + "' index out of range");
            require(!used[static_cast<std::size_t>(k)],
                    "state groups overlap at index " + std::to_string(k));
            used[static_cast<std::size_t>(k)] = true;
        }
    }
    for (const auto& [bus, pair] : output_pairs) {
        require(pair.first >= 0 && pair.first < m && pair.second >= 0 && pair.second < m,
                "output pair for bus '" + bus + "' out of range");
    }
}

std::optional<double> damping_ratio_pct(Complex lambda) {
    double mag = std::abs(lambda);
    if (mag == 0.0) return std::nullopt;
    return 100.0 * (-lambda.real()) / mag;
}

ModeSet compute_modes(const StateSpaceModel& model) {
    model.validate();
    const auto n = model.a.rows();

    Eigen::EigenSolver<Eigen::MatrixXd> solver(model.a, /*computeEigenvectors=*/true);
    require(solver.info() == Eigen::Success, "eigen-decomposition failed to converge");
    Eigen::MatrixXcd v = solver.eigenvectors();
    Eigen::VectorXcd lambda = solver.eigenvalues();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
    double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);

    Eigen::MatrixXcd w = v.inverse();  // rows are left eigenvectors, phi^T psi = I

    double a_norm = model.a.norm();
    ModeSet set;
    set.eigenvector_condition = cond;
    set.reliable = cond <= 1e12;

    for (Eigen::Index i = 0; i < n; ++i) {
        Complex l = lambda(i);
        double im_tol = 1e-12 * std::max(1.0, std::abs(l));
        if (l.imag() < -im_tol) continue;  // conjugate partner reported once
        Mode mode;
        mode.lambda = l;
        mode.frequency_hz = std::abs(l.imag()) / (2.0 * std::numbers::pi);
        auto damping = damping_ratio_pct(l);
        mode.damping_pct = damping ? *damping : std::numeric_limits<double>::quiet_NaN();
        mode.right_vec = v.col(i);
        mode.left_vec = w.row(i).transpose();
        mode.conjugate_pair = l.imag() > im_tol;
        double denom = a_norm * mode.right_vec.norm();
        mode.residual = denom > 0.0
                            ? (model.a * mode.right_vec - l * mode.right_vec).norm() / denom
                            : 0.0;
        set.modes.push_back(std::move(mode));
    }
    return set;
}

void sort_by_damping(ModeSet& set) {
    std::stable_sort(set.modes.begin(), set.modes.end(), [](const Mode& a, const Mode& b) {
        bool a_nan = std::isnan(a.damping_pct), b_nan = std::isnan(b.damping_pct);
        if (a_nan != b_nan) return b_nan;
        if (a_nan) return false;
        return a.damping_pct < b.damping_pct;
    });
}

ParticipationReport participation_factors(const StateSpaceModel& model, const Mode& mode) {
    require(mode.right_vec.size() == model.a.rows() && mode.left_vec.size() == model.a.rows(),
            "mode does not belong to this model");
    ParticipationReport report;
    double max_raw = 0.0;
    for (const auto& [name, idxs] : model.state_groups) {
        double sum = 0.0;
        for (int k : idxs) sum += std::abs(mode.left_vec(k) * mode.right_vec(k));
        if (idxs.empty()) report.empty_groups.push_back(name);
        report.raw[name] = sum;
        max_raw = std::max(max_raw, sum);
    }
    for (const auto& [name, raw] : report.raw)
        report.normalized[name] = max_raw > 0.0 ? raw / max_raw : 0.0;
    return report;
}

ObservabilityReport modal_observability(const StateSpaceModel& model, const Mode& mode) {
    require(mode.right_vec.size() == model.a.rows(), "mode does not belong to this model");
    ObservabilityReport report;
    Eigen::VectorXcd obs = model.c.cast<Complex>() * mode.right_vec;
    for (const auto& [bus, pair] : model.output_pairs) {
        double od = std::abs(obs(pair.first));
        double oq = std::abs(obs(pair.second));
        report.per_bus[bus] = std::hypot(od, oq);
    }
    return report;
}

namespace {

Eigen::MatrixXd parse_matrix_block(const std::vector<std::string>& lines, std::size_t& idx,
                                   Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        while (idx < lines.size() && io::trim(lines[idx]).empty()) ++idx;
        if (idx >= lines.size())
            throw std::runtime_error("matrix " + name + ": unexpected end of file at row " +
                                     std::to_string(r));
        auto cells = io::split(io::trim(lines[idx]), ',');
        if (static_cast<Eigen::Index>(cells.size()) != cols)
            throw std::runtime_error("matrix " + name + " line " + std::to_string(idx + 1) +
                                     ": expected " + std::to_string(cols) + " values, got " +
                                     std::to_string(cells.size()));
        for (Eigen::Index cidx = 0; cidx < cols; ++cidx)
            m(r, cidx) = io::parse_double(cells[static_cast<std::size_t>(cidx)],
                                          "matrix " + name + " line " + std::to_string(idx + 1));
        ++idx;
    }
    return m;
}

std::vector<int> parse_index_list(const std::string& text, const std::string& context) {
    std::vector<int> out;
    for (const auto& tok : io::split(text, ' ')) {
        std::string t = io::trim(tok);
        if (t.empty()) continue;
        out.push_back(static_cast<int>(io::parse_long(t, context)));
    }
    return out;
}

}  // namespace

StateSpaceModel load_state_space(const std::filesystem::path& path) {
    auto lines = io::split(io::read_file(path), '\n');
    StateSpaceModel model;
    long n = -1, m = -1;
    std::size_t idx = 0;
    bool have_a = false, have_c = false;

    while (idx < lines.size()) {
        std::string line = io::trim(lines[idx]);
        if (line.empty() || line[0] == '#') {
            ++idx;
            continue;
        }
        if (line.rfind("matrix ", 0) == 0) {
            std::string name = io::trim(line.substr(7));
            ++idx;
            if (n <= 0)
                throw std::runtime_error(path.string() + ": n_states must precede matrix blocks");
            if (name == "A") {
                model.a = parse_matrix_block(lines, idx, n, n, "A");
                have_a = true;
            } else if (name == "C") {
                if (m < 0)
                    throw std::runtime_error(path.string() + ": n_outputs must precede matrix C");
                model.c = parse_matrix_block(lines, idx, m, n, "C");
                have_c = true;
            } else {
                throw std::runtime_error(path.string() + ": unknown matrix '" + name + "'");
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + " line " + std::to_string(idx + 1) +
                                     ": expected 'key = value'");
        std::string key = io::trim(line.substr(0, eq));
        std::string value = io::trim(line.substr(eq + 1));
        std::string context = path.string() + " line " + std::to_string(idx + 1);
        if (key == "n_states") {
            n = io::parse_long(value, context);
        } else if (key == "n_outputs") {
            m = io::parse_long(value, context);
        } else if (key.rfind("group ", 0) == 0) {
            model.state_groups[io::trim(key.substr(6))] = parse_index_list(value, context);
        } else if (key.rfind("output_pair ", 0) == 0) {
            auto idxs = parse_index_list(value, context);
            if (idxs.size() != 2)
                throw std::runtime_error(context + ": output_pair needs exactly two indices");
            model.output_pairs[io::trim(key.substr(12))] = {idxs[0], idxs[1]};
        } else {
            throw std::runtime_error(context + ": unknown key '" + key + "'");
        }
        ++idx;
    }
    if (!have_a) throw std::runtime_error(path.string() + ": missing matrix A");
    if (m > 0 && !have_c) throw std::runtime_error(path.string() + ": missing matrix C");
    if (m <= 0) model.c = Eigen::MatrixXd(0, n);
    try {
        model.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return model;
}

void save_state_space(const StateSpaceModel& model, const std::filesystem::path& path) {
    model.validate();
    std::string out = "# state-space bundle\n";
    out += "n_states = " + std::to_string(model.a.rows()) + "\n";
    out += "n_outputs = " + std::to_string(model.c.rows()) + "\n";
    for (const auto& [name, idxs] : model.state_groups) {
        out += "group " + name + " =";
        for (int k : idxs) out += " " + std::to_string(k);
        out += "\n";
    }
    for (const auto& [bus, pair] : model.output_pairs)
        out += "output_pair " + bus + " = " + std::to_string(pair.first) + " " +
               std::to_string(pair.second) + "\n";
    auto emit_matrix = [&](const Eigen::MatrixXd& mat, const char* name) {
        out += std::string("matrix ") + name + "\n";
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            for (Eigen::Index c = 0; c < mat.cols(); ++c) {
                if (c) out += ',';
                out += io::sci(mat(r, c));
            }
            out += '\n';
        }
    };
    emit_matrix(model.a, "A");
    if (model.c.rows() > 0) emit_matrix(model.c, "C");
    io::atomic_write(path, out);
}

}  // namespace gfc::modal
