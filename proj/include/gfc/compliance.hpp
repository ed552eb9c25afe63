#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gfc/envelope.hpp"
#include "gfc/jacobian.hpp"

namespace gfc {

enum class Verdict { pass, fail, incomplete };

std::string to_string(Verdict v);

struct CompliancePoint {
    double f_hz;
    double scan_magnitude;
    double envelope_minimum;
    double margin_db;  // 20 log10(scan/envelope)
};

struct ComplianceReport {
    Channel channel;
    Verdict verdict;
    double f_lo_hz, f_hi_hz;
    std::vector<CompliancePoint> per_point;
    double worst_margin_db;     // +inf when no in-band points
    double worst_frequency_hz;  // NaN when no in-band points
    bool coverage_ok;
    double tolerance_db;
};

/// Compares scan magnitudes against the exact envelope branches at every scan
/// point inside the band. PASS at equality (>=); a violated point is
/// conclusive (FAIL) even without full coverage; otherwise insufficient
/// coverage (fewer than 10 in-band points, or grid endpoints more than 10%
/// away from the band edges) yields INCOMPLETE. Margin comparisons carry a
/// 1e-9 dB float guard.
ComplianceReport check_compliance(const JacobianScan& scan, const ComplianceEnvelope& env,
                                  double tolerance_db = 0.0);

struct CrosscheckOptions {
    double tolerance_db = 0.0;
    /// Relative slack on time-domain metric comparisons; covers integration
    /// truncation so an exactly-critical device classifies as compliant.
    double metric_rel_tol = 1e-4;
    std::size_t fd_grid_points = 200;
    EnvelopeOptions envelope;
};

struct EquivalenceReport {
    double rise_time_s;       // 10-90 of the initial change
    double rise_time_0_90_s;  // 0-90 companion metric
    double peak;              // signed, from the pre-disturbance baseline
    std::optional<double> decay_time_s;  // nullopt = never returns to baseline
    Verdict td_verdict;
    Verdict fd_verdict;
    bool consistent;
    ComplianceReport fd_report;
};

/// Simulates a unit step through the device, scores the time-domain metrics
/// against the criteria, and checks the device's analytic frequency response
/// against the equivalent envelope. Peak and decay comparisons act on
/// magnitudes (channel conventions may carry a leading minus sign).
/// Throws std::invalid_argument listing the poles if the device is unstable.
EquivalenceReport time_domain_crosscheck(const TransferFunction& device_tf,
                                         const TimeDomainCriteria& criteria,
                                         const CrosscheckOptions& opt = {});

enum class ReportFormat { text, structured, csv, svg };

std::string render_text(const ComplianceReport& report);
std::string render_structured(const ComplianceReport& report);
std::string render_csv(const ComplianceReport& report);
/// 1000x600 px, dB vs log10(Hz): envelope boundary, shaded non-compliance
/// region, scan markers (violations highlighted), worst point annotated on
/// FAIL.
std::string render_svg(const ComplianceReport& report, const ComplianceEnvelope& env);

/// Writes <basename>.<ext> into out_dir, returns the written path.
std::filesystem::path write_report(const ComplianceReport& report, const ComplianceEnvelope& env,
                                   ReportFormat format, const std::filesystem::path& out_dir,
                                   const std::string& basename);

std::string render_text(const EquivalenceReport& report, const TimeDomainCriteria& criteria);
std::string render_structured(const EquivalenceReport& report, const TimeDomainCriteria& criteria);

}  // namespace gfc
