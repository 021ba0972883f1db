#include <algorithm>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/primitives.hpp"

namespace kornet {

using detail::LayerBuilder;
using detail::LinExpr;

namespace {

// (c, p, q) -> c clamped into [min(p,q) - slack, max(p,q) + slack]
ReluNetwork clamp_net(double slack) {
    LinExpr c = detail::single(0), q = detail::single(2);
    LayerBuilder h1(3);
    std::size_t up = h1.unit(LinExpr{}.add(1, 1.0).add(2, -1.0));    // sigma(p - q)
    std::size_t down = h1.unit(LinExpr{}.add(2, 1.0).add(1, -1.0));  // sigma(q - p)
    std::size_t qq = h1.pair(q);
    std::size_t cc = h1.pair(c);
    Layer l1 = h1.build();

    LinExpr lo = detail::pair_value(qq);
    lo.add(down, -1.0);
    lo.bias = -slack;
    LinExpr hi = detail::pair_value(qq);
    hi.add(up, 1.0);
    hi.bias = slack;
    LinExpr cv = detail::pair_value(cc);
    auto diff = [](LinExpr a, const LinExpr& b) {
        for (const auto& [col, v] : b.terms) a.add(col, -v);
        a.bias -= b.bias;
        return a;
    };
    LayerBuilder h2(l1.w.rows);
    std::size_t above_lo = h2.unit(diff(cv, lo));
    std::size_t above_hi = h2.unit(diff(cv, hi));
    std::size_t lp = h2.pair(lo);
    Layer l2 = h2.build();
    std::size_t rows = l2.w.rows;
    LinExpr out = detail::pair_value(lp);
    out.add(above_lo, 1.0).add(above_hi, -1.0);
    return ReluNetwork(3, {std::move(l1), std::move(l2), detail::output_layer(rows, {out})}, "mid3");
}

ReluNetwork shifted(const ReluNetwork& net, int d, int j, double shift) {
    std::vector<std::vector<double>> eye(d, std::vector<double>(d, 0.0));
    for (int k = 0; k < d; ++k) eye[k][k] = 1.0;
    std::vector<double> b(d, 0.0);
    b[j] = shift;
    return compose(affine_net(eye, b), net);
}

}  // namespace

double mid3(double a, double b, double c) { return std::max(std::min(a, b), std::min(std::max(a, b), c)); }

ReluNetwork mid3_net() { return clamp_net(0.0); }

ReluNetwork mid_extend_net(const ReluNetwork& net, int K, double shift, int d, double slack, ExtendRule rule) {
    if (net.input_dim() != static_cast<std::size_t>(d) || net.output_dim() != 1)
        throw std::invalid_argument("mid_extend_net: net must map R^d to R");
    if (K < 1 || !(shift > 0.0) || shift >= 1.0 / K) throw std::invalid_argument("mid_extend_net: shift must lie in (0, 1/K)");
    if (slack < 0.0) throw std::invalid_argument("mid_extend_net: slack must be non-negative");
    ReluNetwork comb = clamp_net(rule == ExtendRule::median_of_shifts ? 0.0 : slack);
    ReluNetwork cur = net;
    for (int j = 0; j < d; ++j) {
        ReluNetwork three = parallel({cur, shifted(cur, d, j, -shift), shifted(cur, d, j, shift)}, true);
        cur = compose(three, comb);
    }
    return cur.renamed("mid_extend");
}

}  // namespace kornet
