#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kornet/synthesis.hpp"
#include "test_util.hpp"

using namespace kornet;

namespace {

Point random_point(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(0, 1);
    Point x(d);
    for (auto& v : x) v = u(rng);
    return x;
}

// direct level sum over every stored position of level l
double level_sum_ref(const SurplusTable& t, const LevelIndex& l, const Point& x) {
    double s = 0.0;
    for (const auto& i : odd_index_set(l)) s += t.get(l, i) * hat_basis_eval(l, i, x);
    return s;
}

TargetFunction zero_target(int d) {
    TargetFunction f = poly_bump(d, true);
    f.name = "zero";
    f.eval = [](const Point&) { return 0.0; };
    f.grad = [d](const Point&) { return Point(d, 0.0); };
    f.seminorm = 0.0;
    f.w1inf_norm = 0.0;
    return f;
}

}  // namespace

TEST_CASE("budget derivation") {
    CHECK(derived_level(1, 1) == 1);
    CHECK(derived_level(2, 1) == 3);
    CHECK(derived_level(2, 2) == 5);
    CHECK(derived_level(3, 1) == 4);  // 2 log2 3 + 1 = 4.17
    auto b = SynthesisBudget::derived(4, 2, 2);
    CHECK(b.n == 7);
    CHECK(b.delta() == std::ldexp(1.0, -9));
    CHECK(b.cells() == 64);
    CHECK_THROWS_AS(SynthesisBudget::derived(0, 1, 1), std::invalid_argument);
}

TEST_CASE("trifling region membership") {
    TriflingRegion r3(3, 1);
    CHECK(r3.delta == 1.0 / 32);
    CHECK(trifling_contains({0.30}, r3));
    CHECK_FALSE(trifling_contains({0.24}, r3));  // buffer before 1/4
    CHECK(trifling_contains({0.0}, r3));
    CHECK(trifling_contains({1.0}, r3));
    // with n = 2 the finest cells have width 1/2, so 0.24 is kept
    CHECK(trifling_contains({0.24}, TriflingRegion(2, 1)));
    CHECK_FALSE(trifling_contains({0.49}, TriflingRegion(2, 1)));

    // literal intersection over the levels of the truncated index set
    std::mt19937_64 rng(1);
    for (int d : {1, 2, 3}) {
        int n = 4;
        TriflingRegion r(n, d);
        auto levels = level_index_set(n, d);
        for (int k = 0; k < 2000; ++k) {
            Point x = random_point(rng, d);
            bool all = true;
            for (const auto& l : levels) all = all && level_region_contains(l, r.delta, x);
            CHECK(r.contains(x) == all);
        }
    }

    // measure: each coordinate loses (K-1) delta
    for (int d : {1, 2}) {
        int n = 5, P = 20000, in = 0;
        TriflingRegion r(n, d);
        for (int k = 0; k < P; ++k) in += r.contains(random_point(rng, d));
        double frac = double(in) / P;
        double K = 1 << (n - 1);
        double exact = std::pow(1.0 - (K - 1) * r.delta, d);
        double se = std::sqrt(exact * (1 - exact) / P);
        CHECK(std::abs(frac - exact) <= 4 * se + 1e-12);
        CHECK(frac >= 1.0 - d * n * K * r.delta);
    }
}

TEST_CASE("partition reference") {
    std::mt19937_64 rng(2);
    for (int d : {1, 2, 3}) {
        int K = 8;
        auto labels = partition_labels(d);
        CHECK(labels.size() == (1u << d));
        for (int k = 0; k < 10000; ++k) {
            Point x = random_point(rng, d);
            double s = 0.0;
            bool covered = false;
            for (const auto& m : labels) {
                double g = gm_reference(x, m, K);
                s += g;
                covered = covered || omega_m_contains(x, m, K);
                if (!omega_m_contains(x, m, K)) CHECK(g == 0.0);
            }
            CHECK(std::abs(s - 1.0) <= 1e-14);
            CHECK(covered);
        }
    }
    for (int i = 0; i < 4; ++i) CHECK(gm_reference({i / 4.0 + 3.0 / 32}, {1}, 4) == 1.0);
}

TEST_CASE("pq decomposition") {
    auto f = poly_bump(1, false);
    auto t = hierarchize(f, 3, 1);
    auto pq = pq_decompose(t, LevelIndex({1}), f.seminorm);
    CHECK(pq.q.size() == 1);
    CHECK(pq.q[0] == 1.0);
    CHECK(pq.p({0.5}) == 1.0);
    CHECK(pq.eval({0.5}) == 1.0);

    auto g = sine_bump(2, true);
    auto t2 = hierarchize(g, 5, 2);
    std::mt19937_64 rng(3);
    for (const auto& l : t2.levels()) {
        auto q = pq_decompose(t2, l, g.seminorm);
        for (int k = 0; k < 200; ++k) {
            Point x = random_point(rng, 2);
            CHECK(std::abs(q.eval(x) - level_sum_ref(t2, l, x)) <= 1e-12);
        }
        for (std::size_t c = 0; c < q.q.size(); ++c) {
            CHECK(q.xi(c) >= 0.0);
            CHECK(q.xi(c) <= 1.0);
            CHECK(std::abs(q.from_xi(q.xi(c)) - q.q[c]) <= 1e-15);
        }
        CHECK(q.C >= surplus_bound(l, g.seminorm) * (1 - 1e-15));
    }
    CHECK_THROWS_AS(pq_decompose(t2, LevelIndex({7, 1}), 1.0), std::invalid_argument);
}

TEST_CASE("level nets meet their contract on the trimmed level region") {
    std::mt19937_64 rng(4);
    for (int d : {1, 2}) {
        auto f = poly_bump(d, true);
        for (auto [N, L] : {std::pair{2, 2}, std::pair{4, 2}}) {
            auto b = SynthesisBudget::derived(N, L, d);
            auto t = hierarchize(f, b.n, d);
            int samples = d == 1 ? 1000 : 150;
            for (const auto& l : t.levels()) {
                auto pq = pq_decompose(t, l, f.seminorm);
                auto net = synth_level_net(pq, b);
                Evaluator ev(net);
                double bound = level_net_bound(pq, b), worst = 0.0;
                for (int k = 0; k < samples; ++k) {
                    Point x = random_point(rng, d);
                    if (!level_region_contains(l, b.delta(), x)) continue;
                    worst = std::max(worst, std::abs(ev.value(x.data()) - pq.eval(x)));
                }
                INFO("d=" << d << " N=" << N << " level " << l.l[0]);
                CHECK(worst <= bound);
            }
        }
    }
    auto f = poly_bump(1, true);
    auto b = SynthesisBudget::derived(2, 1, 1);
    auto t = hierarchize(f, b.n, 1);
    auto pq = pq_decompose(t, LevelIndex({1}), f.seminorm);
    double v11 = t.get(LevelIndex({1}), {{1}});
    CHECK(std::abs(testutil::eval1(synth_level_net(pq, b), 0.5) - v11) <= level_net_bound(pq, b));
}

TEST_CASE("continuous-rate approximant") {
    auto f = poly_bump(2, true);
    auto a = synth_continuous(f, 2, 1, 2);
    CHECK(a.construction == Construction::continuous_rate);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    Evaluator ev(a.net);
    for (int k = 0; k < 1000; ++k) {
        Point x{u(rng), u(rng)};
        x[k % 2] = (k / 2) % 2 ? 1.0 : 0.0;
        CHECK(ev.value(x.data()) == 0.0);
    }
    CHECK(ev.value(Point{0.0, 0.37}.data()) == 0.0);
    // at a grid point the interpolant is exact; the basis nets add at most their bound times sum |v|
    auto t = hierarchize(f, a.budget.n, 2);
    double vsum = 0.0;
    for (const auto& e : t.entries()) vsum += std::abs(e.v);
    Point g = grid_point(LevelIndex({2, 3}), {{1, 5}});
    CHECK(std::abs(ev.value(g.data()) - f.eval(g)) <= 10 * std::pow(2.0, 2.5) * vsum);
    CHECK(std::abs(ev.value(g.data()) - f.eval(g)) <= 1e-6);

    // one-dimensional H1 error falls as the budget grows
    TargetFunction h = poly_bump(1, false);
    auto base = h.eval;
    h.eval = [base](const Point& x) { return base(x) / 8; };
    auto bg = h.grad;
    h.grad = [bg](const Point& x) { return Point{bg(x)[0] / 8}; };
    double prev = 1e9;
    for (int nl : {2, 4, 8}) {
        auto c = synth_continuous(h, nl, 1, 1);
        Evaluator e(c.net);
        double acc = 0.0;
        int P = 4000;
        for (int k = 0; k < P; ++k) {
            double x = (k + 0.5) / P, gr = 0.0;
            double v = e.value_and_gradient(&x, &gr);
            double dv = v - h.eval({x}), dg = gr - h.grad({x})[0];
            acc += dv * dv + dg * dg;
        }
        double err = std::sqrt(acc / P);
        CHECK(err < prev);
        prev = err;
    }
    CHECK_THROWS_AS(synth_continuous(f, 2, 1, 3), SynthesisError);
}

TEST_CASE("super-convergent Lp approximant") {
    for (int d : {1, 2}) {
        auto f = sine_bump(d, true);
        auto a = synth_superconv_lp(f, 2, 1, d);
        REQUIRE(a.pre_extension);
        TriflingRegion r(a.budget.n, d);
        Evaluator ek(a.net), ep(*a.pre_extension);
        std::mt19937_64 rng(6);
        int inside = 0;
        for (int k = 0; k < 3000; ++k) {
            Point x = random_point(rng, d);
            if (!r.contains(x)) continue;
            ++inside;
            CHECK(std::abs(ek.value(x.data()) - ep.value(x.data())) <= 1e-12);
        }
        CHECK(inside > 1000);
        CHECK(a.warnings.empty());
    }
    auto z = synth_superconv_lp(zero_target(1), 2, 2, 1);
    for (int k = 0; k <= 100; ++k) CHECK(testutil::eval1(z.net, k / 100.0) == 0.0);
    CHECK_FALSE(z.warnings.empty());
}

TEST_CASE("super-convergent H1 approximant") {
    auto f = poly_bump(1, true);
    auto a = synth_superconv_h1(f, 2, 1, 1);
    auto labels = partition_labels(1);
    REQUIRE(a.summands.size() == labels.size());
    int K = a.budget.cells();
    std::mt19937_64 rng(7);
    int off = 0;
    for (std::size_t m = 0; m < labels.size(); ++m) {
        for (int k = 0; k < 2000; ++k) {
            Point x = random_point(rng, 1);
            if (omega_m_contains(x, labels[m], K)) continue;
            ++off;
            auto r = evaluate(a.summands[m], x, false);
            CHECK(r.value[0] == 0.0);
            CHECK(gradient(a.summands[m], x)[0] == 0.0);
        }
    }
    CHECK(off > 500);

    // with the closed-form partition and exact level sums the pieces reassemble the interpolant
    for (int d : {1, 2}) {
        auto g = sine_bump(d, true);
        auto t = hierarchize(g, 4, d);
        for (int k = 0; k < 500; ++k) {
            Point x = random_point(rng, d);
            CHECK(std::abs(h1_reference(t, 8, x) - interpolant_eval(t, x)) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(synth_superconv_h1(f, 2, 1, 2), SynthesisError);
}

TEST_CASE("sidecar and names") {
    auto a = synth_superconv_lp(poly_bump(1, true), 2, 1, 1);
    auto j = sidecar_json(a);
    CHECK(j["construction"] == "superconv_lp");
    CHECK(j["budget"]["n"] == a.budget.n);
    CHECK(j["realized"]["depth"] == a.net.depth());
    CHECK(j["predicted_bounds"].contains("sup_trimmed"));
    for (auto c : {Construction::continuous_rate, Construction::superconv_lp, Construction::superconv_h1})
        CHECK(construction_from_name(construction_name(c)) == c);
    CHECK_THROWS_AS(construction_from_name("bogus"), std::invalid_argument);
}
