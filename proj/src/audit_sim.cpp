#include "aed/audit_sim.hpp"

#include "aed/common.hpp"
#include "aed/csv.hpp"
#include "aed/svg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace aed {

AuditRanking rank_for_audit(std::span<const double> scores, std::span<const std::string> task_ids,
                            std::span<const int> is_error) {
    if (scores.size() != task_ids.size() || scores.size() != is_error.size()) {
        throw DataError("rank_for_audit: scores, task ids and error flags differ in length");
    }
    for (double s : scores) {
        if (std::isnan(s)) {
            throw DataError("rank_for_audit: NaN score");
        }
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : task_ids[a] < task_ids[b];
    });
    AuditRanking out;
    for (std::size_t i : order) {
        out.task_ids.push_back(task_ids[i]);
        out.scores.push_back(scores[i]);
        out.is_error.push_back(is_error[i]);
    }
    return out;
}

AuditCurves compute_curves(const AuditRanking& ranking) {
    const std::size_t n = ranking.is_error.size();
    std::size_t errors = 0;
    for (int e : ranking.is_error) {
        if (e != 0 && e != 1) {
            throw DataError("compute_curves: error flags must be 0 or 1");
        }
        errors += static_cast<std::size_t>(e);
    }
    if (errors == 0 || errors == n) {
        throw DataError("compute_curves: degenerate input, need at least one error and one non-error");
    }
    AuditCurves c;
    c.n = n;
    c.total_errors = errors;
    c.random_baseline_rate = static_cast<double>(errors) / static_cast<double>(n);
    c.flip_rate.resize(n);
    c.coverage.resize(n);
    c.found.resize(n);
    std::size_t found = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        found += static_cast<std::size_t>(ranking.is_error[k - 1]);
        c.found[k - 1] = found;
        c.flip_rate[k - 1] = static_cast<double>(found) / static_cast<double>(k);
        c.coverage[k - 1] = static_cast<double>(found) / static_cast<double>(errors);
    }
    return c;
}

EfficiencyGain efficiency_gain(const AuditCurves& curves, double target_coverage) {
    if (!(target_coverage > 0.0 && target_coverage <= 1.0)) {
        throw DataError("efficiency_gain: target coverage must be in (0, 1]");
    }
    if (curves.n == 0) {
        throw DataError("efficiency_gain: empty curves");
    }
    EfficiencyGain g;
    g.target = target_coverage;
    // Integer comparison found/E >= target avoids rounding at exact targets.
    const auto needed = static_cast<std::size_t>(
        std::ceil(target_coverage * static_cast<double>(curves.total_errors) - 1e-9));
    const auto it = std::lower_bound(curves.found.begin(), curves.found.end(), std::max<std::size_t>(needed, 1));
    if (it == curves.found.end()) {
        throw DataError("efficiency_gain: target coverage unreachable");
    }
    g.k_model = static_cast<std::size_t>(it - curves.found.begin()) + 1;
    g.k_random = static_cast<std::size_t>(std::ceil(target_coverage * static_cast<double>(curves.n) - 1e-9));
    g.k_random = std::max<std::size_t>(g.k_random, 1);
    g.gain = 1.0 - static_cast<double>(g.k_model) / static_cast<double>(g.k_random);
    return g;
}

double early_lift(const AuditCurves& curves, std::size_t k) {
    if (k < 1 || k > curves.n) {
        throw DataError("early_lift: k must be in [1, N]");
    }
    if (!(curves.random_baseline_rate > 0.0)) {
        throw DataError("early_lift: zero baseline error rate");
    }
    return curves.flip_rate[k - 1] / curves.random_baseline_rate;
}

double coverage_area(const AuditCurves& curves) {
    long double total = 0.0L;
    for (double c : curves.coverage) {
        total += c;
    }
    return curves.n == 0 ? 0.0 : static_cast<double>(total / static_cast<long double>(curves.n));
}

double max_diagonal_deviation(const AuditCurves& curves) {
    double worst = 0.0;
    for (std::size_t k = 1; k <= curves.n; ++k) {
        const double diag = static_cast<double>(k) / static_cast<double>(curves.n);
        worst = std::max(worst, std::fabs(curves.coverage[k - 1] - diag));
    }
    return worst;
}

RandomEnvelope random_envelope(std::span<const int> is_error, std::size_t replicates, double level,
                               std::uint64_t seed) {
    if (replicates == 0 || !(level > 0.0 && level < 1.0)) {
        throw DataError("random_envelope: need replicates > 0 and level in (0, 1)");
    }
    std::vector<int> labels(is_error.begin(), is_error.end());
    std::mt19937_64 rng(seed);
    std::vector<double> deviations;
    deviations.reserve(replicates);
    AuditRanking ranking;
    for (std::size_t r = 0; r < replicates; ++r) {
        std::shuffle(labels.begin(), labels.end(), rng);
        ranking.is_error = labels;
        deviations.push_back(max_diagonal_deviation(compute_curves(ranking)));
    }
    std::sort(deviations.begin(), deviations.end());
    const auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(replicates))) - 1;
    return {level, deviations[std::min(idx, replicates - 1)], replicates};
}

void write_curves_csv(std::ostream& out, const AuditCurves& curves) {
    csv::write_row(out, {"k", "errors_found", "flip_rate", "coverage", "random_coverage"});
    for (std::size_t k = 1; k <= curves.n; ++k) {
        csv::write_row(out, {std::to_string(k), std::to_string(curves.found[k - 1]),
                             format_double(curves.flip_rate[k - 1]), format_double(curves.coverage[k - 1]),
                             format_double(static_cast<double>(k) / static_cast<double>(curves.n))});
    }
}

AuditSummary summarize_audit(const std::string& name, const AuditCurves& curves, double target_coverage,
                             std::span<const std::size_t> lift_ks) {
    AuditSummary s;
    s.name = name;
    s.curves = curves;
    s.gain = efficiency_gain(curves, target_coverage);
    for (std::size_t k : lift_ks) {
        if (k >= 1 && k <= curves.n) {
            s.lifts.emplace_back(k, early_lift(curves, k));
        }
    }
    return s;
}

nlohmann::ordered_json to_json(const AuditSummary& summary) {
    nlohmann::ordered_json j;
    j["name"] = summary.name;
    j["n_tasks"] = summary.curves.n;
    j["n_errors"] = summary.curves.total_errors;
    j["error_rate"] = summary.curves.random_baseline_rate;
    j["target_coverage"] = summary.gain.target;
    j["k_model"] = summary.gain.k_model;
    j["k_random"] = summary.gain.k_random;
    j["efficiency_gain"] = summary.gain.gain;
    nlohmann::ordered_json lifts = nlohmann::ordered_json::object();
    for (const auto& [k, lift] : summary.lifts) {
        lifts[std::to_string(k)] = lift;
    }
    j["early_lift"] = lifts;
    j["coverage_area"] = coverage_area(summary.curves);
    return j;
}

namespace {

std::vector<LineSeries> series_of(const std::vector<AuditSummary>& summaries, bool coverage) {
    std::vector<LineSeries> out;
    for (const auto& s : summaries) {
        LineSeries line;
        line.label = s.name;
        const auto& ys = coverage ? s.curves.coverage : s.curves.flip_rate;
        for (std::size_t k = 1; k <= s.curves.n; ++k) {
            line.x.push_back(static_cast<double>(k) / static_cast<double>(s.curves.n));
            line.y.push_back(ys[k - 1]);
        }
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace

void write_flip_rate_svg(std::ostream& out, const std::vector<AuditSummary>& summaries) {
    write_line_chart(out, "Labels changed by audit volume", "fraction of tasks audited", "flip rate",
                     series_of(summaries, false));
}

void write_coverage_svg(std::ostream& out, const std::vector<AuditSummary>& summaries) {
    std::vector<LineSeries> series = series_of(summaries, true);
    series.push_back({"random", {0.0, 1.0}, {0.0, 1.0}, true});
    write_line_chart(out, "Errors caught by audit volume", "fraction of tasks audited", "fraction of errors caught",
                     series);
}

}  // namespace aed
