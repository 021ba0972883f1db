#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kornet/relu_net.hpp"
#include "kornet/sparse_grid.hpp"

namespace kornet {

struct Domain {
    enum class Kind { full, trifling, omega_m };
    Kind kind = Kind::full;
    int n = 0;           // trifling: truncation level
    std::vector<int> m;  // omega_m: partition label
    int K = 0;           // omega_m: cells per coordinate

    static Domain full() { return {}; }
    static Domain trifling(int n) { return {Kind::trifling, n, {}, 0}; }
    static Domain omega(std::vector<int> m, int K) { return {Kind::omega_m, 0, std::move(m), K}; }

    bool contains(const Point& x) const;
    std::string name() const;
    nlohmann::json to_json() const;
};

enum class Norm { sup, lp, h1 };
std::string norm_name(Norm n);

struct ErrorReport {
    Norm norm = Norm::sup;
    double p = 0.0;  // exponent for lp
    double estimate = 0.0;
    double std_error = 0.0;  // Monte Carlo standard error, 0 for sup
    long samples = 0;        // points inside the domain
    std::uint64_t seed = 0;
    Domain domain;
    std::optional<double> predicted_bound;

    nlohmann::json to_json() const;
    // one JSON object on one line
    std::string json_line() const;
};

// Evaluation points: a randomly shifted van der Corput sequence for d=1, uniform otherwise, moved by a
// fixed jitter so they miss dyadic breakpoints. Point k depends only on (seed, k).
Point sample_point(int d, std::uint64_t seed, long k);
inline constexpr double kink_jitter = 5.3e-6;

// Max |f - net| over the sample points plus a dyadic grid, both filtered by the domain.
// The grid resolution is n+2 for trifling domains, 6 otherwise, lowered until it has
// at most max(samples, 4096) points.
ErrorReport sup_error(const TargetFunction& f, const ReluNetwork& net, const Domain& domain, long samples,
                      std::uint64_t seed);
// (integral over the domain of |f - net|^p)^(1/p) by Monte Carlo; p = infinity gives sup_error
ErrorReport lp_error(const TargetFunction& f, const ReluNetwork& net, double p, long samples, std::uint64_t seed,
                     const Domain& domain = Domain::full());
ErrorReport h1_error(const TargetFunction& f, const ReluNetwork& net, long samples, std::uint64_t seed);
int dyadic_resolution(const Domain& domain, int d, long samples);

struct RateFit {
    std::vector<std::pair<double, double>> points;  // (NL, error)
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// least squares on (log2 NL, log2 error)
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

// max |analytic - central difference| / (1 + |analytic|); differences use an
// extended-precision forward pass
double gradient_check(const ReluNetwork& net, const std::vector<Point>& points, double fd_step);
// forward pass in long double
long double forward_extended(const ReluNetwork& net, const std::vector<long double>& x);
// up to `count` points in [lo, hi]^d with no kink of any axis slice within +-radius. Each slice
// is walked piece by piece and the output slope must stay constant to
// 1e-8 relative;
// unit switches that cancel in the output do not count, a slice needing more than 64 pieces
// is rejected. Tries at most max_candidates (default 50 * count) candidates.
std::vector<Point> safe_points(const ReluNetwork& net, double lo, double hi, int count, std::uint64_t seed,
                               double radius, long max_candidates = 0);

struct RateRow {
    std::string construction;
    int d = 1, N = 1, L = 1;
    std::string norm;
    double error = 0.0;
    std::optional<double> predicted_bound;
    long samples = 0;
    std::uint64_t seed = 0;
};

std::string rate_csv_header();
std::string rate_csv_line(const RateRow& r);
// shortest round-trip decimal form
std::string format_number(double v);

}  // namespace kornet
