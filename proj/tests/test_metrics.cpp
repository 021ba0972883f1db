#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kornet/metrics.hpp"
#include "kornet/primitives.hpp"
#include "kornet/rng.hpp"
#include "kornet/synthesis.hpp"

using namespace kornet;

namespace {

TargetFunction from_lambda(int d, std::function<double(const Point&)> f, std::function<Point(const Point&)> g = {}) {
    TargetFunction t;
    t.name = "test";
    t.d = d;
    t.eval = std::move(f);
    t.grad = std::move(g);
    return t;
}

TargetFunction hat_target(int l, int i) {
    return from_lambda(
        1, [l, i](const Point& x) { return hat1d(l, i, x[0]); },
        [l, i](const Point& x) {
            double X = std::ldexp(x[0], l);
            double s = std::ldexp(1.0, l);
            if (X <= i - 1 || X >= i + 1) return Point{0.0};
            return Point{X < i ? s : -s};
        });
}

TargetFunction zero(int d) {
    return from_lambda(d, [](const Point&) { return 0.0; }, [d](const Point&) { return Point(d, 0.0); });
}

}  // namespace

TEST_CASE("counter generator") {
    CHECK(counter_uniform(1, 0, 5) == counter_uniform(1, 0, 5));
    CHECK(counter_uniform(1, 0, 5) != counter_uniform(2, 0, 5));
    CHECK(counter_uniform(1, 0, 5) != counter_uniform(1, 1, 5));
    double mean = 0;
    for (int k = 0; k < 100000; ++k) {
        double u = counter_uniform(9, 0, k);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    CHECK(std::abs(mean / 100000 - 0.5) < 0.005);
    for (int d : {1, 2, 3})
        for (int k = 0; k < 1000; ++k) {
            Point x = sample_point(d, 4, k);
            for (double v : x) {
                CHECK(v >= 0.0);
                CHECK(v < 1.0);
            }
            CHECK(x == sample_point(d, 4, k));
        }
}

TEST_CASE("sup error") {
    auto hat = hat1d_net(3, 5);
    auto r = sup_error(hat_target(3, 5), hat, Domain::full(), 1000, 1);
    CHECK(r.estimate == 0.0);
    CHECK(r.samples >= 1000);
    CHECK(r.norm == Norm::sup);

    // staircase on its plateaus: the trimmed region with 8 finest cells has delta = 1/64
    auto step = step_net(8, 1.0 / 64, 2, 2);
    auto stair = from_lambda(1, [](const Point& x) { return std::min(7.0, std::floor(x[0] * 8)); });
    CHECK(sup_error(stair, step, Domain::trifling(4), 2000, 2).estimate == 0.0);
    CHECK(sup_error(stair, step, Domain::full(), 2000, 2).estimate > 0.5);

    auto prod = product2_net({2, 3, 1.0, 2});
    auto xy = from_lambda(2, [](const Point& x) { return x[0] * x[1]; });
    auto pr = sup_error(xy, prod, Domain::full(), 4000, 3);
    CHECK(pr.estimate <= 6 * std::pow(2.0, -3));
    CHECK(pr.estimate > 0.0);

    // doubling the samples never lowers the estimate
    auto sq = from_lambda(1, [](const Point& x) { return x[0] * x[0]; });
    auto sn = square_net(2, 2);
    double prev = 0.0;
    for (long s : {10L, 20L, 40L, 80L, 160L, 5000L, 10000L}) {
        double e = sup_error(sq, sn, Domain::full(), s, 5).estimate;
        CHECK(e >= prev);
        prev = e;
    }
    CHECK(dyadic_resolution(Domain::trifling(4), 1, 100) == 6);
    CHECK(dyadic_resolution(Domain::full(), 2, 100) == 5);  // 65^2 = 4225 > 4096
    CHECK(dyadic_resolution(Domain::full(), 2, 10000) == 6);
    CHECK(dyadic_resolution(Domain::full(), 2, 5000) == 6);
    CHECK_THROWS_AS(sup_error(sq, sn, Domain::full(), 0, 1), std::invalid_argument);
}

TEST_CASE("lp error") {
    auto hat = hat1d_net(2, 1);
    CHECK(lp_error(hat_target(2, 1), hat, 2, 1000, 1).estimate == 0.0);

    auto c = affine_net({{0.0, 0.0}}, {0.25});
    for (double p : {1.0, 2.0, 3.5}) {
        auto r = lp_error(zero(2), c, p, 500, 2);
        CHECK(std::abs(r.estimate - 0.25) <= 3 * r.std_error + 1e-15);
    }

    // tensor midpoint quadrature oracle for the gap x + y
    auto lin = affine_net({{1.0, 1.0}}, {0.0});
    double q = 0.0;
    int M = 400;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            double x = (a + 0.5) / M, y = (b + 0.5) / M;
            q += (x + y) * (x + y);
        }
    q = std::sqrt(q / (double(M) * M));
    auto r = lp_error(zero(2), lin, 2, 20000, 3);
    CHECK(std::abs(r.estimate - q) <= 0.01 * q);
    CHECK(std::abs(q - std::sqrt(7.0 / 6)) < 1e-5);

    auto inf = lp_error(zero(2), lin, INFINITY, 100, 4);
    CHECK(inf.norm == Norm::sup);
    CHECK(inf.estimate == 2.0);  // the dyadic grid reaches (1, 1)
    CHECK_THROWS_AS(lp_error(zero(2), lin, 0.5, 100, 4), std::invalid_argument);
}

TEST_CASE("h1 error") {
    auto hat = hat1d_net(1, 1);
    CHECK(h1_error(hat_target(1, 1), hat, 2000, 1).estimate == 0.0);
    // integral of hat^2 is 1/3 and of slope^2 is 4
    const double exact = std::sqrt(13.0 / 3);
    auto r = h1_error(zero(1), hat, 20000, 2);
    CHECK(std::abs(r.estimate - exact) <= 1e-3 * exact);

    // quadrature oracle for the same integral
    double q = 0.0;
    int M = 100000;
    for (int k = 0; k < M; ++k) {
        double x = (k + 0.5) / M, h = hat1d(1, 1, x), s = x < 0.5 ? 2.0 : -2.0;
        q += h * h + s * s;
    }
    CHECK(std::abs(std::sqrt(q / M) - exact) < 1e-6);

    auto f = sine_bump(2, true);
    auto a = synth_continuous(f, 2, 1, 2);
    auto h = h1_error(f, a.net, 3000, 3);
    auto l2 = lp_error(f, a.net, 2, 3000, 3);
    CHECK(h.estimate >= l2.estimate);
    TargetFunction nograd = f;
    nograd.grad = nullptr;
    CHECK_THROWS_AS(h1_error(nograd, a.net, 100, 1), std::invalid_argument);
}

TEST_CASE("norm ordering and determinism") {
    auto f = poly_bump(2, true);
    auto a = synth_continuous(f, 2, 1, 2);
    auto l1 = lp_error(f, a.net, 1, 2000, 11);
    auto l2 = lp_error(f, a.net, 2, 2000, 11);
    auto sup = sup_error(f, a.net, Domain::full(), 2000, 11);
    CHECK(l1.estimate <= l2.estimate);
    CHECK(l2.estimate <= sup.estimate);
    CHECK(lp_error(f, a.net, 2, 2000, 11).json_line() == l2.json_line());
    CHECK(sup_error(f, a.net, Domain::full(), 2000, 11).json_line() == sup.json_line());
    CHECK(lp_error(f, a.net, 2, 2000, 12).json_line() != l2.json_line());
    auto j = nlohmann::json::parse(l2.json_line());
    CHECK(j["norm"] == "lp");
    CHECK(j["p"] == 2.0);
    CHECK(j["domain"]["kind"] == "full");
    CHECK(j["predicted_bound"].is_null());
}

TEST_CASE("rate fit") {
    auto fit = rate_fit({{2, 1e-2}, {4, 2.5e-3}, {8, 6.25e-4}});
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rate_fit({{2, 0.1}, {4, 0.1}, {8, 0.1}}).slope == doctest::Approx(0.0));
    for (int d : {2, 3}) {
        std::vector<std::pair<double, double>> pts;
        for (double N : {8.0, 16.0, 32.0, 64.0, 128.0}) pts.push_back({N, std::pow(N, -4.0) * std::pow(std::log2(N), d - 1)});
        auto r = rate_fit(pts);
        CHECK(r.slope > -4.0);
        CHECK(r.slope < -3.3);
    }
    CHECK_THROWS_AS(rate_fit({{2, 1}, {4, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(rate_fit({{2, 1}, {4, 0}, {8, 1}}), std::invalid_argument);
}

TEST_CASE("gradient check") {
    auto lin = affine_net({{1.5, -2.0}}, {0.5});
    std::vector<Point> pts;
    for (int k = 0; k < 20; ++k) pts.push_back(sample_point(2, 1, k));
    CHECK(gradient_check(lin, pts, 1e-6) <= 1e-9);

    auto prod = product2_net({2, 2, 1.0, 2});
    auto safe = safe_points(prod, -0.9, 0.9, 100, 2, 1e-4);
    CHECK(safe.size() == 100);
    CHECK(gradient_check(prod, safe, 1e-6) <= 1e-6);

    auto hat = hat1d_net(2, 1);
    // kinks at 0, 1/4 and 1/2; every returned point keeps its distance from all of them
    auto away = safe_points(hat, -0.2, 0.8, 200, 3, 0.01);
    CHECK(away.size() == 200);
    for (const auto& x : away)
        for (double kink : {0.0, 0.25, 0.5}) CHECK(std::abs(x[0] - kink) >= 0.01);
    CHECK(safe_points(hat, 0.24, 0.26, 10, 3, 0.05).empty());
    CHECK(safe_points(hat, 0.1, 0.2, 10, 3, 0.01, 5).size() == 5);
    CHECK(gradient({hat}, {0.1})[0] == 4.0);
    CHECK(gradient({hat}, {0.4})[0] == -4.0);
    CHECK(gradient_check(hat, {{0.1}, {0.4}}, 1e-6) <= 1e-9);
    CHECK(forward_extended(hat, {0.125L}) == 0.5L);

    std::vector<std::string> lines{rate_csv_header(),
                                   rate_csv_line({"superconv_lp", 1, 2, 4, "sup", 1.5e-5, 2.4e-5, 100, 7})};
    CHECK(lines[0] == "construction,d,N,L,NL,norm,error,predicted_bound,samples,seed");
    CHECK(lines[1] == "superconv_lp,1,2,4,8,sup,1.5e-05,2.4e-05,100,7");
    CHECK(rate_csv_line({"x", 1, 1, 1, "h1", 0.5, std::nullopt, 3, 1}) == "x,1,1,1,1,h1,0.5,,3,1");
}
