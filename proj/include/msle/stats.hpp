#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace msle {

struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderror() const {
        return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
    }
};

// standard error of the mean of a correlated sequence, via batch means
inline double batch_stderr(const std::vector<double>& xs, std::size_t n_batches = 50) {
    if (xs.size() < 2 * n_batches) n_batches = std::max<std::size_t>(2, xs.size() / 2);
    std::size_t bs = xs.size() / n_batches;
    MeanVar mv;
    for (std::size_t b = 0; b < n_batches; ++b) {
        double s = 0;
        for (std::size_t i = b * bs; i < (b + 1) * bs; ++i) s += xs[i];
        mv.add(s / static_cast<double>(bs));
    }
    return mv.stderror();
}

inline double binomial_stderr(double phat, std::size_t n) {
    if (n == 0) return 1.0;
    double se = std::sqrt(phat * (1.0 - phat) / static_cast<double>(n));
    // keep a floor when the estimate saturates at 0 or 1
    return std::max(se, 1.0 / static_cast<double>(n));
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false; // at the level the test was run at
};

// asymptotic Kolmogorov CDF complement, Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
inline double ks_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// two-sample Kolmogorov-Smirnov test; level defaults to 1%.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double level = 0.01) {
    if (a.size() < 5 || b.size() < 5)
        throw std::invalid_argument("ks_two_sample: need at least 5 samples per side");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        double fa = static_cast<double>(i) / static_cast<double>(a.size());
        double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                static_cast<double>(a.size() + b.size());
    double sq = std::sqrt(ne);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;
    KsResult r;
    r.statistic = d;
    r.p_value = ks_q(lambda);
    r.reject = r.p_value < level;
    return r;
}

// least-squares slope through the origin
inline double slope_through_origin(const std::vector<double>& t, const std::vector<double>& y) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        num += t[i] * y[i];
        den += t[i] * t[i];
    }
    if (den == 0) throw std::invalid_argument("slope_through_origin: degenerate abscissae");
    return num / den;
}

} // namespace msle
