#include "doctest.h"

#include "aed/audit_sim.hpp"
#include "aed/common.hpp"
#include "aed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace aed;

namespace {

std::vector<std::string> ids(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string s = std::to_string(i);
        out.push_back("t" + std::string(6 - s.size(), '0') + s);
    }
    return out;
}

AuditCurves perfect_curves(std::size_t n, std::size_t e) {
    std::vector<int> y(n, 0);
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < e; ++i) {
        y[i * (n / e)] = 1;
        s[i * (n / e)] = 1.0;
    }
    return compute_curves(rank_for_audit(s, ids(n), y));
}

}  // namespace

TEST_CASE("ranking order and tie-break") {
    const auto r = rank_for_audit(std::vector<double>{0.2, 0.9, 0.5}, std::vector<std::string>{"a", "b", "c"},
                                  std::vector<int>{0, 1, 0});
    CHECK(r.task_ids == std::vector<std::string>{"b", "c", "a"});
    const auto tied = rank_for_audit(std::vector<double>{0.5, 0.5, 0.5}, std::vector<std::string>{"z", "a", "m"},
                                     std::vector<int>{0, 1, 0});
    CHECK(tied.task_ids == std::vector<std::string>{"a", "m", "z"});
    const auto permuted = rank_for_audit(std::vector<double>{0.5, 0.9, 0.2}, std::vector<std::string>{"c", "b", "a"},
                                         std::vector<int>{0, 1, 0});
    CHECK(permuted.task_ids == r.task_ids);
    CHECK_THROWS_AS(rank_for_audit(std::vector<double>{0.1}, std::vector<std::string>{}, std::vector<int>{0}),
                    DataError);
    CHECK_THROWS_AS(rank_for_audit(std::vector<double>{std::nan("")}, std::vector<std::string>{"a"},
                                   std::vector<int>{0}),
                    DataError);
}

TEST_CASE("perfect ranking") {
    const AuditCurves c = perfect_curves(1000, 100);
    for (std::size_t k = 1; k <= 1000; ++k) {
        const double want = k <= 100 ? static_cast<double>(k) / 100.0 : 1.0;
        REQUIRE(c.coverage[k - 1] == want);
    }
    const EfficiencyGain g = efficiency_gain(c, 0.8);
    CHECK(g.k_model == 80);
    CHECK(g.k_random == 800);
    CHECK(g.gain == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(early_lift(c, 50) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(early_lift(c, 1000) == 1.0);
    CHECK_THROWS_AS(early_lift(c, 0), DataError);
    CHECK_THROWS_AS(early_lift(c, 1001), DataError);

    // gain = 1 - 0.8 E / ceil(0.8 N) whenever 0.8 E is whole.
    for (std::size_t n : {37u, 100u, 999u, 5000u}) {
        for (std::size_t e : {5u, 10u, 25u}) {
            if (e >= n) continue;
            const EfficiencyGain pg = efficiency_gain(perfect_curves(n, e), 0.8);
            const double k_random = std::ceil(0.8 * static_cast<double>(n) - 1e-9);
            CHECK(pg.k_model == static_cast<std::size_t>(0.8 * static_cast<double>(e) + 0.5));
            CHECK(pg.gain == 1.0 - 0.8 * static_cast<double>(e) / k_random);
        }
    }
}

TEST_CASE("curve invariants") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 50 + rng() % 500;
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::round(u(rng) * 20.0);
            y[i] = u(rng) < 0.15 ? 1 : 0;
        }
        y[0] = 1;
        y[1] = 0;
        const AuditCurves c = compute_curves(rank_for_audit(s, ids(n), y));
        const double step = 1.0 / static_cast<double>(c.total_errors);
        double prev = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            const double d = c.coverage[k - 1] - prev;
            CHECK((d == 0.0 || std::fabs(d - step) < 1e-12));
            prev = c.coverage[k - 1];
            CHECK(c.flip_rate[k - 1] == static_cast<double>(c.found[k - 1]) / static_cast<double>(k));
        }
        CHECK(c.coverage.back() == 1.0);
        CHECK(c.flip_rate.back() == static_cast<double>(c.total_errors) / static_cast<double>(n));
        CHECK(early_lift(c, n) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("degenerate inputs") {
    AuditRanking r;
    r.is_error = {0, 0, 0};
    CHECK_THROWS_AS(compute_curves(r), DataError);
    r.is_error = {1, 1};
    CHECK_THROWS_AS(compute_curves(r), DataError);
    const AuditCurves c = perfect_curves(100, 10);
    CHECK_THROWS_AS(efficiency_gain(c, 0.0), DataError);
    CHECK_THROWS_AS(efficiency_gain(c, 1.2), DataError);
    CHECK(efficiency_gain(c, 1.0).k_model == 10);
}

TEST_CASE("coverage area is an affine function of AUC") {
    // For distinct scores: area = ((N - E) AUC + (E + 1) / 2) / N.
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::size_t e = 1; e < n; ++e) {
            std::vector<int> y(n, 0);
            std::fill(y.end() - static_cast<long>(e), y.end(), 1);
            std::vector<double> s(n);
            std::iota(s.begin(), s.end(), 0.0);
            do {
                const double area = coverage_area(compute_curves(rank_for_audit(s, ids(n), y)));
                const double expected = (static_cast<double>(n - e) * auc(s, y) + (static_cast<double>(e) + 1.0) / 2.0) /
                                        static_cast<double>(n);
                REQUIRE(std::fabs(area - expected) < 1e-12);
            } while (std::next_permutation(y.begin(), y.end()));
        }
    }
}

TEST_CASE("random rankings stay inside the Monte-Carlo envelope") {
    const std::size_t n = 10000;
    std::vector<int> y(n, 0);
    for (std::size_t i = 0; i < n; i += 10) y[i] = 1;
    const RandomEnvelope env = random_envelope(y, 500, 0.99, 17);
    CHECK(env.half_width > 0.0);
    CHECK(env.half_width < 0.05);
    CHECK(random_envelope(y, 500, 0.99, 17).half_width == env.half_width);

    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u;
    const auto names = ids(n);
    int inside = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> s(n);
        for (double& v : s) v = u(rng);
        const AuditCurves c = compute_curves(rank_for_audit(s, names, y));
        inside += max_diagonal_deviation(c) <= env.half_width ? 1 : 0;
        if (t == 0) CHECK(std::fabs(efficiency_gain(c, 0.8).gain) <= env.half_width / 0.8 + 1e-3);
    }
    // Expect about 99%; 95% leaves room for Monte-Carlo error in both samples.
    CHECK(inside >= trials * 95 / 100);
}

TEST_CASE("summary, CSV and charts") {
    const AuditCurves c = perfect_curves(200, 20);
    const std::vector<std::size_t> ks{10, 50, 500};
    const AuditSummary s = summarize_audit("perfect", c, 0.8, ks);
    CHECK(s.lifts.size() == 2);  // k = 500 exceeds N
    const auto j = to_json(s);
    CHECK(j["k_model"] == 16);
    CHECK(j["k_random"] == 160);
    CHECK(j["early_lift"]["10"].get<double>() == doctest::Approx(10.0));
    std::ostringstream csv;
    write_curves_csv(csv, c);
    CHECK(csv.str().rfind("k,errors_found,flip_rate,coverage,random_coverage\n1,1,1,0.05,0.005\n", 0) == 0);
    std::ostringstream svg;
    write_coverage_svg(svg, {s});
    CHECK(svg.str().find("random") != std::string::npos);
    std::ostringstream flip;
    write_flip_rate_svg(flip, {s});
    CHECK(flip.str().find("</svg>") != std::string::npos);
}
