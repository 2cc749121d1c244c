#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sg {

namespace detail {

// Continued-fraction evaluation for the regularized incomplete beta function
// (modified Lentz). Standard formulation, see e.g. Numerical Recipes 6.4.
inline double betacf(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin)
        d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin)
            d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin)
            c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps)
            break;
    }
    return h;
}

} // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0)
        throw DomainError("incomplete_beta requires x in [0, 1]");
    if (x == 0.0)
        return 0.0;
    if (x == 1.0)
        return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-tailed tail mass of Student's t: P(|T| >= |t|) with df degrees of
// freedom, via I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_tailed_p(double t, int df) {
    if (df < 1)
        throw DomainError("student_t_two_tailed_p requires df >= 1");
    const double x = df / (df + t * t);
    return incomplete_beta(0.5 * df, 0.5, x);
}

// Result of a two-tailed paired t-test at the 0.05 threshold.
struct TTestReport {
    std::string config_a;
    std::string config_b;
    double t_statistic = 0.0;
    int degrees_of_freedom = 0;
    double p_value = 1.0;
    bool significant = false;
    bool degenerate = false; // sd of differences was zero with nonzero mean
};

constexpr double kSignificanceThreshold = 0.05;

// Paired two-tailed t-test on matched accuracy vectors.
// t = mean(d) / (sd(d)/sqrt(n)) with sample sd (divisor n-1).
inline TTestReport paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw LengthMismatch("paired_t_test on vectors of length " + std::to_string(a.size()) +
                             " and " + std::to_string(b.size()));
    if (a.size() < 2)
        throw TooFewSamples("paired_t_test needs at least 2 pairs");

    const std::size_t n = a.size();
    std::vector<double> d(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a[i] - b[i];
        mean += d[i];
    }
    mean /= double(n);
    double ss = 0.0;
    for (double v : d)
        ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / double(n - 1));

    TTestReport r;
    r.degrees_of_freedom = static_cast<int>(n) - 1;
    if (sd == 0.0) {
        if (mean == 0.0) {
            r.t_statistic = 0.0;
            r.p_value = 1.0;
        } else {
            // all pairs differ by the same nonzero amount
            r.t_statistic = mean > 0 ? INFINITY : -INFINITY;
            r.p_value = 0.0;
            r.degenerate = true;
        }
    } else {
        r.t_statistic = mean / (sd / std::sqrt(double(n)));
        r.p_value = student_t_two_tailed_p(r.t_statistic, r.degrees_of_freedom);
    }
    r.significant = r.p_value < kSignificanceThreshold;
    return r;
}

// Pairwise tests over named accuracy vectors; entry (i, j) compares config i
// against config j. Diagonal entries are left defaulted.
using SignificanceMatrix = std::vector<std::vector<TTestReport>>;

inline SignificanceMatrix significance_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    if (series.size() < 2)
        throw TooFewSamples("significance_matrix needs at least 2 configurations");

    const std::size_t n = series.size();
    SignificanceMatrix m(n, std::vector<TTestReport>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                m[i][j].config_a = series[i].first;
                m[i][j].config_b = series[j].first;
                continue;
            }
            m[i][j] = paired_t_test(series[i].second, series[j].second);
            m[i][j].config_a = series[i].first;
            m[i][j].config_b = series[j].first;
        }
    }
    return m;
}

inline std::size_t count_significant_pairs(const SignificanceMatrix& m) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j)
            if (m[i][j].significant)
                ++count;
    return count;
}

inline std::size_t unordered_pair_count(const SignificanceMatrix& m) {
    return m.size() * (m.size() - 1) / 2;
}

} // namespace sg
