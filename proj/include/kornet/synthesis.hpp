#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kornet/primitives.hpp"
#include "kornet/relu_net.hpp"
#include "kornet/sparse_grid.hpp"

namespace kornet {

// Thrown when a requested approximant cannot be built from the given budget.
struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthesisBudget {
    int N = 1;
    int L = 1;
    int n = 1;  // truncation level
    int d = 1;
    int s = 2;  // accuracy exponent

    // n = max(1, round(2 log2(NL) + 1))
    static SynthesisBudget derived(int N, int L, int d);
    void validate() const;
    // buffer width 2^-(n+2)
    double delta() const;
    // cells per coordinate at the finest level, 2^(n-1)
    int cells() const { return 1 << (n - 1); }
};

int derived_level(int N, int L);

struct TriflingRegion {
    int n = 1;
    int d = 1;
    double delta = 0.125;

    TriflingRegion(int n, int d);
    bool contains(const Point& x) const;
};

bool trifling_contains(const Point& x, const TriflingRegion& r);
// x avoids the buffer [b - delta, b) before every interior cell boundary b of level l
bool level_region_contains(const LevelIndex& l, double delta, const Point& x);

// closed-form partition function prod_j g_{m_j}(x_j) on cells of size 1/K
double gm_reference(const Point& x, const std::vector<int>& m, int K);
bool omega_m_contains(const Point& x, const std::vector<int>& m, int K);
// all m in {1,2}^d, first coordinate fastest
std::vector<std::vector<int>> partition_labels(int d);

// One level of the interpolant written as (hat-train product) * (cellwise constant).
struct PQFactor {
    LevelIndex level{std::vector<int>{1}};
    std::vector<int> cells;  // cells per coordinate, 2^(l_r - 1)
    std::vector<double> q;   // one surplus per cell, first coordinate fastest
    double C = 1.0;          // normalization, |q| <= C

    std::size_t cell_index(const Point& x) const;
    double p(const Point& x) const;
    double q_at(const Point& x) const;
    double eval(const Point& x) const { return p(x) * q_at(x); }
    // q mapped into [0, 1]
    double xi(std::size_t cell) const { return (q[cell] + C) / (2.0 * C); }
    double from_xi(double v) const { return 2.0 * C * v - C; }
};

// C = max(2^(-d-|l|_1) seminorm, max |v|); a zero level gets C = 1
PQFactor pq_decompose(const SurplusTable& t, const LevelIndex& l, double seminorm = 0.0);

// (26 + 4C) N^-4 L^-4
double level_net_bound(const PQFactor& pq, const SynthesisBudget& b);

// step nets per coordinate -> cell number -> memorized surplus, times the hat-train product
ReluNetwork synth_level_net(const PQFactor& pq, const SynthesisBudget& b);
ReluNetwork synth_level_net(const SurplusTable& t, const LevelIndex& l, const SynthesisBudget& b,
                            double seminorm = 0.0);

enum class Construction { continuous_rate, superconv_lp, superconv_h1 };
std::string construction_name(Construction c);
Construction construction_from_name(const std::string& name);

struct SynthesizedApproximant {
    ReluNetwork net;
    TargetFunction target;
    SynthesisBudget budget;
    std::map<std::string, double> predicted_bounds;
    Construction construction = Construction::continuous_rate;

    // superconv_lp: the net before domain extension
    std::optional<ReluNetwork> pre_extension;
    // superconv_h1: one summand per partition label, in partition_labels order
    std::vector<ReluNetwork> summands;
    std::vector<std::string> warnings;
};

SynthesizedApproximant synth_continuous(const TargetFunction& f, int N, int L, int d);
SynthesizedApproximant synth_superconv_lp(const TargetFunction& f, int N, int L, int d);
SynthesizedApproximant synth_superconv_h1(const TargetFunction& f, int N, int L, int d);
SynthesizedApproximant synthesize(Construction c, const TargetFunction& f, int N, int L, int d);

// truncation level used by the continuous-rate net
int continuous_level(int N, int L);

// sum over m of g_m times the level-n interpolant; equals the interpolant
double h1_reference(const SurplusTable& t, int K, const Point& x);

// {construction, budget, predicted_bounds, realized:{width, depth, params}}
nlohmann::json sidecar_json(const SynthesizedApproximant& a);

}  // namespace kornet
