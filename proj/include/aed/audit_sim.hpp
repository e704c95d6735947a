#pragma once

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aed {

// Tasks in audit order: descending score, ties by ascending task_id.
struct AuditRanking {
    std::vector<std::string> task_ids;
    std::vector<double> scores;
    std::vector<int> is_error;
};

AuditRanking rank_for_audit(std::span<const double> scores, std::span<const std::string> task_ids,
                            std::span<const int> is_error);

// Index k-1 holds the value after auditing the first k tasks.
struct AuditCurves {
    std::vector<double> flip_rate;  // errors found / k
    std::vector<double> coverage;   // errors found / total errors
    std::vector<std::size_t> found;
    std::size_t n = 0;
    std::size_t total_errors = 0;
    double random_baseline_rate = 0.0;
};

// Throws DataError unless the ranking holds at least one error and one
// non-error.
AuditCurves compute_curves(const AuditRanking& ranking);

struct EfficiencyGain {
    double target = 0.0;
    std::size_t k_model = 0;   // smallest k with coverage(k) >= target
    std::size_t k_random = 0;  // ceil(target * N)
    double gain = 0.0;         // 1 - k_model / k_random
};

EfficiencyGain efficiency_gain(const AuditCurves& curves, double target_coverage);

// flip_rate(k) / overall error rate.
double early_lift(const AuditCurves& curves, std::size_t k);

// Area under the coverage curve, mean of coverage(k) over k = 1..N.
double coverage_area(const AuditCurves& curves);

// Pointwise band for coverage(k) under uniformly random audit order, from
// `replicates` seeded shuffles of the labels. The band is simultaneous:
// `half_width` is the `level` quantile of the largest deviation from the
// diagonal k/N over all k, so a random ranking stays inside everywhere with
// probability about `level`.
struct RandomEnvelope {
    double level = 0.0;
    double half_width = 0.0;
    std::size_t replicates = 0;
};

RandomEnvelope random_envelope(std::span<const int> is_error, std::size_t replicates, double level,
                               std::uint64_t seed);

// Largest |coverage(k) - k/N| over k.
double max_diagonal_deviation(const AuditCurves& curves);

void write_curves_csv(std::ostream& out, const AuditCurves& curves);

struct AuditSummary {
    std::string name;
    AuditCurves curves;
    EfficiencyGain gain;
    std::vector<std::pair<std::size_t, double>> lifts;
};

AuditSummary summarize_audit(const std::string& name, const AuditCurves& curves, double target_coverage,
                             std::span<const std::size_t> lift_ks);
nlohmann::ordered_json to_json(const AuditSummary& summary);

// Flip-rate and coverage charts over several named curve sets.
void write_flip_rate_svg(std::ostream& out, const std::vector<AuditSummary>& summaries);
void write_coverage_svg(std::ostream& out, const std::vector<AuditSummary>& summaries);

}  // namespace aed
