#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "signalgauge/stats.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// Quadrature oracle: two-tailed p = 1 - 2 * integral_0^|t| pdf, with the
// Student-t density integrated by composite Simpson. Shares nothing with the
// continued-fraction path.
double simpson_two_tailed_p(double t, int df) {
    const double at = std::fabs(t);
    const double lognorm = std::lgamma((df + 1) / 2.0) - std::lgamma(df / 2.0) -
                           0.5 * std::log(df * M_PI);
    auto pdf = [&](double x) {
        return std::exp(lognorm - 0.5 * (df + 1) * std::log1p(x * x / df));
    };
    const int n = 20000; // even
    const double h = at / n;
    double sum = pdf(0.0) + pdf(at);
    for (int i = 1; i < n; ++i)
        sum += pdf(i * h) * (i % 2 ? 4.0 : 2.0);
    return 1.0 - 2.0 * sum * h / 3.0;
}

} // namespace

TEST_CASE("incomplete beta endpoints and symmetry") {
    CHECK(sg::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(sg::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS_AS(sg::incomplete_beta(2.0, 3.0, -0.1), sg::DomainError);
    CHECK_THROWS_AS(sg::incomplete_beta(2.0, 3.0, 1.1), sg::DomainError);
    // I_x(a,b) = 1 - I_{1-x}(b,a)
    for (double x : {0.1, 0.37, 0.5, 0.83}) {
        CHECK_THAT(sg::incomplete_beta(2.5, 1.25, x),
                   WithinAbs(1.0 - sg::incomplete_beta(1.25, 2.5, 1.0 - x), 1e-12));
    }
    // I_x(1,1) = x (uniform distribution)
    CHECK_THAT(sg::incomplete_beta(1.0, 1.0, 0.42), WithinAbs(0.42, 1e-12));
}

TEST_CASE("student t p-value closed form at df=2") {
    // for df=2, p = 1 - |t| / sqrt(t^2 + 2)
    for (double t : {0.0, 0.5, 1.0, 3.4641016151377544, 10.0}) {
        const double closed = 1.0 - std::fabs(t) / std::sqrt(t * t + 2.0);
        CHECK_THAT(sg::student_t_two_tailed_p(t, 2), WithinAbs(closed, 1e-12));
        CHECK_THAT(sg::student_t_two_tailed_p(-t, 2), WithinAbs(closed, 1e-12));
    }
    CHECK_THROWS_AS(sg::student_t_two_tailed_p(1.0, 0), sg::DomainError);
}

TEST_CASE("student t p-value matches the quadrature oracle") {
    for (int df : {1, 2, 4, 9, 30}) {
        for (double t : {0.0, 0.3, 1.0, 2.2, 4.5}) {
            CHECK_THAT(sg::student_t_two_tailed_p(t, df),
                       WithinAbs(simpson_two_tailed_p(t, df), 1e-6));
        }
    }
}

TEST_CASE("p is monotone decreasing in |t|") {
    for (int df : {2, 5, 20}) {
        double prev = 1.1;
        for (double t = 0.0; t <= 6.0; t += 0.25) {
            const double p = sg::student_t_two_tailed_p(t, df);
            CHECK(p <= prev + 1e-15);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            prev = p;
        }
    }
}

TEST_CASE("paired t-test hand example") {
    // d = (-1, -2, -3): mean -2, sd 1, t = -2 / (1/sqrt(3)) = -3.4641
    auto r = sg::paired_t_test({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
    CHECK_THAT(r.t_statistic, WithinAbs(-3.4641016151377544, 1e-12));
    CHECK(r.degrees_of_freedom == 2);
    CHECK_THAT(r.p_value, WithinAbs(0.07417990022744858, 1e-9));
    CHECK_FALSE(r.significant);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("identical vectors give t=0, p=1") {
    auto r = sg::paired_t_test({0.5, 0.6, 0.7}, {0.5, 0.6, 0.7});
    CHECK(r.t_statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK_FALSE(r.significant);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("constant nonzero difference is degenerate") {
    // 0.25 is exactly representable, so every difference is bit-identical
    auto r = sg::paired_t_test({1.0, 2.0, 3.0}, {1.25, 2.25, 3.25});
    CHECK(r.degenerate);
    CHECK(r.p_value == 0.0);
    CHECK(r.significant);
    CHECK(std::isinf(r.t_statistic));
    CHECK(r.t_statistic < 0);
}

TEST_CASE("t-test input validation") {
    CHECK_THROWS_AS(sg::paired_t_test({1.0, 2.0}, {1.0}), sg::LengthMismatch);
    CHECK_THROWS_AS(sg::paired_t_test({1.0}, {2.0}), sg::TooFewSamples);
}

TEST_CASE("swapping the arguments negates t and keeps p") {
    const std::vector<double> a = {0.91, 0.87, 0.95, 0.90};
    const std::vector<double> b = {0.84, 0.88, 0.86, 0.85};
    auto ab = sg::paired_t_test(a, b);
    auto ba = sg::paired_t_test(b, a);
    CHECK_THAT(ab.t_statistic, WithinAbs(-ba.t_statistic, 1e-12));
    CHECK_THAT(ab.p_value, WithinAbs(ba.p_value, 1e-12));
}

TEST_CASE("shift invariance and scale equivariance") {
    const std::vector<double> a = {0.2, 0.5, 0.9, 0.4, 0.7};
    const std::vector<double> b = {0.3, 0.4, 0.8, 0.6, 0.5};
    auto base = sg::paired_t_test(a, b);

    std::vector<double> a_shift = a, b_shift = b;
    for (double& v : a_shift)
        v += 10.0;
    for (double& v : b_shift)
        v += 10.0;
    CHECK_THAT(sg::paired_t_test(a_shift, b_shift).t_statistic,
               WithinAbs(base.t_statistic, 1e-9));

    std::vector<double> a_scale = a, b_scale = b;
    for (double& v : a_scale)
        v *= 3.0;
    for (double& v : b_scale)
        v *= 3.0;
    CHECK_THAT(sg::paired_t_test(a_scale, b_scale).t_statistic,
               WithinAbs(base.t_statistic, 1e-9));
    CHECK_THAT(sg::paired_t_test(a_scale, b_scale).p_value, WithinAbs(base.p_value, 1e-9));
}

TEST_CASE("significance matrix shape, symmetry, and counting") {
    std::vector<std::pair<std::string, std::vector<double>>> series = {
        {"a", {0.90, 0.91, 0.92}},
        {"b", {0.80, 0.78, 0.79}},
        {"c", {0.90, 0.91, 0.92}},
    };
    auto m = sg::significance_matrix(series);
    REQUIRE(m.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(m[i].size() == 3);
        CHECK(m[i][i].t_statistic == 0.0);
        CHECK(m[i][i].config_a == series[i].first);
        for (std::size_t j = 0; j < 3; ++j) {
            if (i == j)
                continue;
            CHECK_THAT(m[i][j].t_statistic, WithinAbs(-m[j][i].t_statistic, 1e-12));
            CHECK_THAT(m[i][j].p_value, WithinAbs(m[j][i].p_value, 1e-12));
            CHECK(m[i][j].config_a == series[i].first);
            CHECK(m[i][j].config_b == series[j].first);
        }
    }
    CHECK(sg::unordered_pair_count(m) == 3);
    // a vs c are identical series: p = 1; a vs b and b vs c are strongly
    // separated and should both register
    CHECK(m[0][2].p_value == 1.0);
    CHECK(m[0][1].significant);
    CHECK(m[1][2].significant);
    CHECK(sg::count_significant_pairs(m) == 2);

    CHECK_THROWS_AS(sg::significance_matrix({{"only", {1.0, 2.0}}}), sg::TooFewSamples);
}
