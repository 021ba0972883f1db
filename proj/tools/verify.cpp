#include <cmath>
#include <functional>
#include <sstream>

#include "cli.hpp"
#include "kornet/metrics.hpp"
#include "kornet/primitives.hpp"
#include "kornet/rng.hpp"

namespace kornet::cli {

namespace {

struct Suite {
    std::string name;
    std::vector<CheckResult>* out;

    void check(const std::string& what, bool pass, const std::string& detail = "") {
        out->push_back({name, what, pass, detail});
    }
};

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// copy of the net with one weight nudged
ReluNetwork perturbed(const ReluNetwork& net) {
    auto layers = net.layers();
    layers[0].w.val[0] += 1e-3;
    return ReluNetwork(net.input_dim(), std::move(layers), net.construction());
}

Point at(std::uint64_t seed, long k, int d, double lo = 0.0, double hi = 1.0) {
    Point x(d);
    for (int j = 0; j < d; ++j) x[j] = lo + (hi - lo) * counter_uniform(seed, j, k);
    return x;
}

void primitives_suite(Suite s, bool fault) {
    // hats are exact
    int hat_bad = 0;
    for (int l = 1; l <= 4; ++l)
        for (int i = 1; i < (1 << l); i += 2) {
            ReluNetwork h = hat1d_net(l, i);
            if (fault && l == 3 && i == 5) h = perturbed(h);
            for (int k = 0; k <= 256; ++k) {
                double x = k / 256.0;
                if (forward(h, {x})[0] != hat1d(l, i, x)) ++hat_bad;
            }
        }
    s.check("hat nets exact", hat_bad == 0, std::to_string(hat_bad) + " mismatches");

    // zero slices of the products
    ReluNetwork p = product2_net({2, 3, 1.0, 2});
    int zero_bad = 0;
    for (long k = 0; k < 1000; ++k) {
        double y = at(11, k, 1, -1, 1)[0];
        if (forward(p, {0.0, y})[0] != 0.0 || gradient(p, {0.0, y})[1] != 0.0) ++zero_bad;
    }
    s.check("product zero slice", zero_bad == 0, std::to_string(zero_bad) + " nonzero");

    double worst = 0.0;
    for (int a = 0; a <= 100; ++a)
        for (int b = 0; b <= 100; ++b) {
            double x = -1 + a / 50.0, y = -1 + b / 50.0;
            worst = std::max(worst, std::abs(forward(p, {x, y})[0] - x * y));
        }
    s.check("product value bound", worst <= 6.0 * std::pow(2.0, -3), "max " + num(worst));

    ReluNetwork m = multi_product_net({1, 1, 1.0, 3});
    int multi_bad = 0;
    for (long k = 0; k < 300; ++k) {
        Point x = at(12, k, 3);
        x[k % 3] = 0.0;
        if (forward(m, x)[0] != 0.0) ++multi_bad;
    }
    s.check("multi product zero slice", multi_bad == 0, std::to_string(multi_bad) + " nonzero");

    // staircase plateaus
    int step_bad = 0;
    for (int K : {4, 8, 16}) {
        double delta = 1.0 / (4.0 * K);
        ReluNetwork st = step_net(K, delta, 2, 2);
        for (int k = 0; k < 500; ++k) {
            double x = at(13, k, 1)[0];
            int c = std::min(K - 1, static_cast<int>(std::floor(x * K)));
            if (c < K - 1 && x >= double(c + 1) / K - delta) continue;
            if (forward(st, {x})[0] != c) ++step_bad;
        }
    }
    s.check("step plateaus exact", step_bad == 0, std::to_string(step_bad) + " mismatches");

    BitExtractSpec spec;
    spec.N = spec.L = 2;
    spec.s = 2;
    for (int k = 0; k < 16; ++k) spec.values.push_back(counter_uniform(14, 0, k));
    ReluNetwork bx = bit_extract_net(spec);
    double berr = 0.0;
    for (int k = 0; k < 16; ++k) berr = std::max(berr, std::abs(forward(bx, {double(k)})[0] - spec.values[k]));
    s.check("bit extraction bound", berr <= std::pow(4.0, -4.0), "max " + num(berr));

    // partition of unity and vanishing off the cover sets
    int part_bad = 0;
    const int K = 8;
    std::vector<ReluNetwork> parts{partition_net({1}, K, 2, 1), partition_net({2}, K, 2, 1)};
    for (long k = 0; k < 1000; ++k) {
        double x = at(15, k, 1)[0];
        double sum = partition_ref(1, K, x) + partition_ref(2, K, x);
        if (std::abs(sum - 1.0) > 1e-14) ++part_bad;
        for (int mm : {1, 2})
            if (!in_omega(mm, K, x) && (forward(parts[mm - 1], {x})[0] != 0.0 || gradient(parts[mm - 1], {x})[0] != 0.0))
                ++part_bad;
    }
    s.check("partition of unity", part_bad == 0, std::to_string(part_bad) + " violations");

    ReluNetwork mid = mid3_net();
    int mid_bad = 0;
    for (long k = 0; k < 500; ++k) {
        Point v = at(16, k, 3, -2, 2);
        if (std::abs(forward(mid, v)[0] - mid3(v[0], v[1], v[2])) > 1e-15) ++mid_bad;
    }
    s.check("mid of three", mid_bad == 0, std::to_string(mid_bad) + " mismatches");
}

void sparse_grid_suite(Suite s) {
    int viol = 0;
    for (const char* name : {"poly", "sine"})
        for (int d : {1, 2}) {
            TargetFunction f = make_target(name, d, false);
            SurplusTable t = hierarchize(f, 6, d);
            for (const auto& e : t.entries())
                if (std::abs(e.v) > surplus_bound(e.l, f.seminorm) * (1 + 1e-12)) ++viol;
        }
    s.check("surplus bound", viol == 0, std::to_string(viol) + " violations");

    TargetFunction f = make_target("sine", 2, true);
    SurplusTable t = hierarchize(f, 4, 2);
    double worst = 0.0;
    for (const auto& e : t.entries()) {
        Point x = grid_point(e.l, e.i);
        worst = std::max(worst, std::abs(interpolant_eval(t, x) - f.eval(x)));
    }
    s.check("interpolation at grid points", worst <= 1e-14, "max " + num(worst));

    SurplusTable back = surplus_table_from_json(nlohmann::json::parse(to_json(t).dump()));
    bool same = back.size() == t.size();
    for (const auto& e : t.entries()) same = same && back.get(e.l, e.i) == e.v;
    s.check("surplus JSON round trip", same);
}

void synthesis_suite(Suite s) {
    TargetFunction f2 = make_target("poly", 2, true);
    auto c = synth_continuous(f2, 2, 1, 2);
    int bnd = 0;
    for (long k = 0; k < 1000; ++k) {
        Point x = at(21, k, 2);
        x[k % 2] = (k / 2) % 2 ? 1.0 : 0.0;
        if (forward(c.net, x)[0] != 0.0) ++bnd;
    }
    s.check("boundary exactness", bnd == 0, std::to_string(bnd) + " nonzero");

    int cover = 0;
    for (long k = 0; k < 10000; ++k) {
        Point x = at(22, k, 2);
        double sum = 0.0;
        bool in = false;
        for (const auto& m : partition_labels(2)) {
            sum += gm_reference(x, m, 8);
            in = in || omega_m_contains(x, m, 8);
        }
        if (std::abs(sum - 1.0) > 1e-14 || !in) ++cover;
    }
    s.check("cover identity", cover == 0, std::to_string(cover) + " violations");

    TargetFunction f1 = make_target("sine", 1, true);
    auto lp = synth_superconv_lp(f1, 2, 2, 1);
    TriflingRegion r(lp.budget.n, 1);
    double ext = 0.0;
    for (long k = 0; k < 2000; ++k) {
        Point x = at(23, k, 1);
        if (r.contains(x)) ext = std::max(ext, std::abs(forward(lp.net, x)[0] - forward(*lp.pre_extension, x)[0]));
    }
    s.check("extension consistency", ext <= 1e-12, "max " + num(ext));

    auto b = SynthesisBudget::derived(2, 2, 1);
    SurplusTable t = hierarchize(f1, b.n, 1);
    int contract = 0;
    for (const auto& l : t.levels()) {
        PQFactor pq = pq_decompose(t, l, f1.seminorm);
        ReluNetwork net = synth_level_net(pq, b);
        double bound = level_net_bound(pq, b);
        for (long k = 0; k < 300; ++k) {
            Point x = at(24, k, 1);
            if (level_region_contains(l, b.delta(), x) && std::abs(forward(net, x)[0] - pq.eval(x)) > bound) ++contract;
        }
    }
    s.check("level-net contract", contract == 0, std::to_string(contract) + " violations");

    double gap = 0.0;
    for (auto con : {Construction::continuous_rate, Construction::superconv_lp, Construction::superconv_h1}) {
        auto a = synthesize(con, f1, 2, 1, 1);
        for (double radius : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
            auto pts = safe_points(a.net, 0, 1, 200, 25, radius);
            if (pts.size() < 200) continue;
            gap = std::max(gap, gradient_check(a.net, pts, radius / 100));
            break;
        }
    }
    s.check("gradient consistency", gap <= 1e-6, "max " + num(gap));
}

}  // namespace

std::vector<CheckResult> run_verify(const std::string& suite, bool inject_fault) {
    if (suite != "primitives" && suite != "sparse_grid" && suite != "synthesis" && suite != "all")
        throw ConfigError("unknown suite '" + suite + "' (expected primitives, sparse_grid, synthesis or all)");
    std::vector<CheckResult> out;
    if (suite == "primitives" || suite == "all") primitives_suite({"primitives", &out}, inject_fault);
    if (suite == "sparse_grid" || suite == "all") sparse_grid_suite({"sparse_grid", &out});
    if (suite == "synthesis" || suite == "all") synthesis_suite({"synthesis", &out});
    return out;
}

}  // namespace kornet::cli
