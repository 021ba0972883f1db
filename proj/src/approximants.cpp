#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/synthesis.hpp"

namespace kornet {

namespace {

double log_factor(int N, int L, int d) {
    return std::pow(std::max(1.0, std::log2(double(N))), d - 1) * std::pow(std::max(1.0, std::log2(double(L))), d - 1);
}

double pow2_ceil(double v) { return std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(v) - 1e-12))); }

ReluNetwork scaled(const ReluNetwork& net, double c) { return map_output(net, {{c}}, {0.0}); }

// sum of the outputs of nets sharing one input, no extra depth
ReluNetwork parallel_sum(const std::vector<ReluNetwork>& nets, const std::vector<double>& weights) {
    return map_output(parallel(nets, true), {weights}, {0.0});
}

// f / c, with the derivative data scaled to match
TargetFunction divided(const TargetFunction& f, double c) {
    if (c == 1.0) return f;
    TargetFunction g = f;
    auto ev = f.eval;
    g.eval = [ev, c](const Point& x) { return ev(x) / c; };
    if (f.grad) {
        auto gr = f.grad;
        g.grad = [gr, c](const Point& x) {
            Point v = gr(x);
            for (auto& e : v) e /= c;
            return v;
        };
    }
    g.seminorm = f.seminorm / c;
    g.w1inf_norm = f.w1inf_norm / c;
    return g;
}

struct LevelSum {
    ReluNetwork net;
    double bound = 0.0;  // sum of the level contracts
    double reach = 0.0;  // bound on |net| everywhere
};

// sum_chain of level nets over every level with a nonzero surplus
LevelSum level_sum(const SurplusTable& t, const SynthesisBudget& b, double seminorm) {
    LevelSum out;
    std::vector<ReluNetwork> nets;
    for (const auto& l : t.levels()) {
        PQFactor pq = pq_decompose(t, l, seminorm);
        if (std::all_of(pq.q.begin(), pq.q.end(), [](double v) { return v == 0.0; })) continue;
        nets.push_back(synth_level_net(pq, b));
        out.bound += level_net_bound(pq, b);
        out.reach += 1.01 * pq.C + 1e-3;
    }
    out.net = nets.empty() ? constant_net(b.d, 0.0) : sum_chain(nets);
    return out;
}

}  // namespace

std::string construction_name(Construction c) {
    switch (c) {
        case Construction::continuous_rate: return "continuous_rate";
        case Construction::superconv_lp: return "superconv_lp";
        case Construction::superconv_h1: return "superconv_h1";
    }
    return "?";
}

Construction construction_from_name(const std::string& name) {
    for (auto c : {Construction::continuous_rate, Construction::superconv_lp, Construction::superconv_h1})
        if (construction_name(c) == name) return c;
    throw std::invalid_argument("unknown construction '" + name + "'");
}

int continuous_level(int N, int L) {
    if (N < 1 || L < 1) throw std::invalid_argument("budget: N and L must be >= 1");
    return std::max(1, static_cast<int>(std::lround(std::log2(double(N) * L)))) + 4;
}

SynthesizedApproximant synth_continuous(const TargetFunction& f, int N, int L, int d) {
    if (f.d != d) throw SynthesisError("target dimension differs from d");
    if (!f.vanishes_on_boundary) throw SynthesisError("continuous-rate net needs a target vanishing on the boundary");
    SynthesisBudget b{N, L, continuous_level(N, L), d, 2};
    b.validate();
    SurplusTable t = hierarchize(f, b.n, d);
    // grid products with one unit of width per factor and enough depth for the finest hats
    const int Lg = (b.n + 6 + 7 * d - 1) / (7 * d);
    std::vector<ReluNetwork> stages;
    for (std::size_t k = 0; k < t.levels().size(); ++k) {
        const auto& l = t.levels()[k];
        auto pos = odd_index_set(l);
        const auto& vals = t.level_values(k);
        std::vector<ReluNetwork> nets;
        std::vector<double> w;
        for (std::size_t q = 0; q < pos.size(); ++q) {
            if (vals[q] == 0.0) continue;
            nets.push_back(grid_basis_net(l, pos[q], 1, Lg));
            w.push_back(vals[q]);
        }
        if (!nets.empty()) stages.push_back(parallel_sum(nets, w));
    }
    SynthesizedApproximant a;
    a.net = (stages.empty() ? constant_net(d, 0.0) : sum_chain(stages)).renamed("continuous_rate");
    a.target = f;
    a.budget = b;
    a.construction = Construction::continuous_rate;
    double nl = double(N) * L;
    a.predicted_bounds = {{"h1", 1.0 / nl}, {"l2", 1.0 / (nl * nl)}};
    return a;
}

SynthesizedApproximant synth_superconv_lp(const TargetFunction& f, int N, int L, int d) {
    if (f.d != d) throw SynthesisError("target dimension differs from d");
    SynthesisBudget b = SynthesisBudget::derived(N, L, d);
    const double scale = std::max(1.0, f.seminorm);
    TargetFunction g = divided(f, scale);
    SurplusTable t = hierarchize(g, b.n, d);
    LevelSum ks = level_sum(t, b, g.seminorm);

    SynthesizedApproximant a;
    ReluNetwork inner = scaled(ks.net, scale).renamed("superconv_lp_inner");
    const double delta = b.delta();
    // neighbours one shift apart differ by at most |grad f| delta plus both approximation errors;
    // later rounds see neighbours that were themselves repaired
    double spread = scale * ks.bound;
    if (f.w1inf_norm > 0.0) {
        spread += f.w1inf_norm * delta;
    } else {
        a.warnings.push_back("no modulus of continuity supplied; only the trimmed-region error is meaningful");
    }
    double slack = 4.0 * d * spread;
    a.net = mid_extend_net(inner, b.cells(), delta, d, slack, ExtendRule::clamp_to_neighbors).renamed("superconv_lp");
    a.pre_extension = inner;
    a.target = f;
    a.budget = b;
    a.construction = Construction::superconv_lp;
    double nl = double(N) * L;
    double rate = std::pow(nl, -4.0) * log_factor(N, L, d);
    a.predicted_bounds = {{"sup_trimmed", rate}, {"lp", rate}};
    return a;
}

SynthesizedApproximant synth_superconv_h1(const TargetFunction& f, int N, int L, int d) {
    if (f.d != d) throw SynthesisError("target dimension differs from d");
    if (!f.vanishes_on_boundary) throw SynthesisError("H1 super-convergent net needs a target vanishing on the boundary");
    SynthesisBudget b = SynthesisBudget::derived(N, L, d);
    const int K = b.cells();
    const double half = 0.5 / K;
    const double scale = std::max({1.0, f.seminorm, f.w1inf_norm});
    TargetFunction g = divided(f, scale);

    // Each label gets the level sum of F(z) = g(2z - shift) on [0,1]^d, zero outside the cube.
    // Cells of F at level n+1 are cells of size 1/K in x, starting at -shift, so every
    // buffer falls where the matching partition function is flat zero.
    SynthesisBudget bf = b;
    bf.n = b.n + 1;
    const double lg = std::log2(double(N) * L);
    SynthesizedApproximant a;
    std::vector<ReluNetwork> summands;
    for (const auto& m : partition_labels(d)) {
        Point shift(d);
        for (int j = 0; j < d; ++j) shift[j] = m[j] == 2 ? half : 0.0;
        TargetFunction F;
        F.name = g.name + "_shifted";
        F.d = d;
        auto ev = g.eval;
        F.eval = [ev, shift](const Point& z) {
            Point x(z.size());
            for (std::size_t j = 0; j < z.size(); ++j) {
                x[j] = 2.0 * z[j] - shift[j];
                if (x[j] <= 0.0 || x[j] >= 1.0) return 0.0;
            }
            return ev(x);
        };
        F.seminorm = g.seminorm * std::pow(4.0, d);
        F.w1inf_norm = 2.0 * g.w1inf_norm;
        F.vanishes_on_boundary = true;
        SurplusTable t = hierarchize(F, bf.n, d);
        LevelSum ks = level_sum(t, bf, 0.0);

        std::vector<std::vector<double>> w(d, std::vector<double>(d, 0.0));
        std::vector<double> c(d);
        for (int j = 0; j < d; ++j) {
            w[j][j] = 0.5;
            c[j] = 0.5 * shift[j];
        }
        ReluNetwork local = compose(affine_net(w, c), ks.net);
        ReluNetwork part = partition_net(m, K, N, L);
        double amp = pow2_ceil(std::max(1.0, ks.reach));
        // slopes entering the product: 4K from the partition, 2^(n+1) from the finest hats
        int teeth = static_cast<int>(std::ceil(std::log2(amp) + b.n + 3 + 2.0 * lg)) + 5;
        ReluNetwork prod = product2_net_teeth(teeth, detail::bits_for(N), amp);
        ReluNetwork term = compose(parallel({part, local}, true), prod);
        summands.push_back(scaled(term, scale).renamed("partition_summand"));
    }
    a.net = parallel_sum(summands, std::vector<double>(summands.size(), 1.0)).renamed("superconv_h1");
    a.summands = std::move(summands);
    a.target = f;
    a.budget = b;
    a.construction = Construction::superconv_h1;
    double nl = double(N) * L;
    a.predicted_bounds = {{"h1", std::pow(nl, -2.0) * log_factor(N, L, d)}};
    return a;
}

SynthesizedApproximant synthesize(Construction c, const TargetFunction& f, int N, int L, int d) {
    switch (c) {
        case Construction::continuous_rate: return synth_continuous(f, N, L, d);
        case Construction::superconv_lp: return synth_superconv_lp(f, N, L, d);
        case Construction::superconv_h1: return synth_superconv_h1(f, N, L, d);
    }
    throw std::invalid_argument("unknown construction");
}

double h1_reference(const SurplusTable& t, int K, const Point& x) {
    double v = interpolant_eval(t, x), s = 0.0;
    for (const auto& m : partition_labels(t.d())) s += gm_reference(x, m, K) * v;
    return s;
}

nlohmann::json sidecar_json(const SynthesizedApproximant& a) {
    const auto& b = a.budget;
    nlohmann::json bounds = nlohmann::json::object();
    for (const auto& [k, v] : a.predicted_bounds) bounds[k] = v;
    return {{"construction", construction_name(a.construction)},
            {"budget", {{"N", b.N}, {"L", b.L}, {"n", b.n}, {"d", b.d}, {"s", b.s}}},
            {"predicted_bounds", bounds},
            {"realized", {{"width", a.net.width()}, {"depth", a.net.depth()}, {"params", a.net.params()}}}};
}

}  // namespace kornet
