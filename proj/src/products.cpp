#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/primitives.hpp"

namespace kornet {

using detail::LayerBuilder;
using detail::LinExpr;

void ProductBudget::validate() const {
    if (N < 1 || L < 1) throw std::invalid_argument("product budget needs N, L >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("product budget needs a > 0");
    if (s < 2) throw std::invalid_argument("product arity must be >= 2");
}

ReluNetwork pwl_net(const std::vector<double>& knots, const std::vector<double>& values) {
    if (knots.empty() || knots.size() != values.size()) throw std::invalid_argument("pwl_net: bad knot list");
    for (std::size_t k = 1; k < knots.size(); ++k)
        if (!(knots[k] > knots[k - 1])) throw std::invalid_argument("pwl_net: knots must increase");
    LayerBuilder h(1);
    LinExpr out;
    out.bias = values[0];
    double prev_slope = 0.0;
    for (std::size_t k = 0; k < knots.size(); ++k) {
        double slope = k + 1 < knots.size() ? (values[k + 1] - values[k]) / (knots[k + 1] - knots[k]) : 0.0;
        std::size_t u = h.unit(detail::single(0), 1.0, -knots[k]);
        out.add(u, slope - prev_slope);
        prev_slope = slope;
    }
    std::size_t cols = h.size();
    return ReluNetwork(1, {h.build(), detail::output_layer(cols, {out})}, "pwl");
}

namespace {

// slope of T_q on the k-th cell of the grid with spacing 2^-r (q <= r)
double tooth_slope(int q, int r, long k) {
    double mid = (k + 0.5) / std::ldexp(1.0, r);
    long half = static_cast<long>(std::floor(mid * std::ldexp(1.0, q)));
    return std::ldexp(half % 2 == 0 ? 1.0 : -1.0, q);
}

// T_r over [lo, hi] on knots k/2^r
ReluNetwork tooth_layer(int r, int lo, int hi) {
    std::vector<double> knots, values;
    long cells = static_cast<long>(hi - lo) << r;
    for (long k = 0; k <= cells; ++k) {
        knots.push_back(lo + std::ldexp(double(k), -r));
        values.push_back(k % 2 == 0 ? 0.0 : 1.0);
    }
    return pwl_net(knots, values);
}

}  // namespace

ReluNetwork sawtooth_net(int j, int lo, int hi, int bits_per_layer) {
    if (j < 1 || bits_per_layer < 1 || hi <= lo) throw std::invalid_argument("sawtooth_net: bad arguments");
    int r = std::min(j, bits_per_layer);
    ReluNetwork net = tooth_layer(r, lo, hi);
    for (int done = r; done < j; done += r) {
        r = std::min(j - done, bits_per_layer);
        net = compose(net, tooth_layer(r, 0, 1));
    }
    return net.renamed("sawtooth");
}

ReluNetwork teeth_net(int i) {
    if (i < 1) throw std::invalid_argument("teeth_net: i must be >= 1");
    return sawtooth_net(i, -1, 1, 1).renamed("teeth");
}

int square_teeth(int N, int L) {
    if (N < 1 || L < 1) throw std::invalid_argument("square_net: N, L must be >= 1");
    return static_cast<int>(std::ceil((L * std::log2(double(N)) + 2.0) / 2.0 - 1e-12));
}

ReluNetwork square_net(int N, int L) {
    return square_net_teeth(square_teeth(N, L), detail::bits_for(N)).renamed("square");
}

ReluNetwork square_net_teeth(int teeth, int m) {
    if (teeth < 0 || m < 1) throw std::invalid_argument("square_net_teeth: bad arguments");
    LinExpr x = detail::single(0);
    if (teeth == 0) {
        LayerBuilder h(1);
        std::size_t p = h.pair(x);
        std::size_t cols = h.size();
        return ReluNetwork(1, {h.build(), detail::output_layer(cols, {LinExpr{}.add(p, 1.0).add(p + 1, 1.0)})}, "square");
    }
    std::vector<Layer> layers;
    LinExpr u, acc;  // current tooth input and running approximation, over the previous layer
    std::size_t cols = 1;
    int done = 0;
    while (done < teeth) {
        int r = std::min(m, teeth - done);
        long knots = 1L << r;
        LayerBuilder h(cols);
        // value of sigma(u - k/2^r) as a combination of this layer's units
        std::vector<LinExpr> knot(knots);
        for (long k = 0; k < knots; ++k) {
            double shift = -std::ldexp(double(k), -r);
            if (done == 0) {
                std::size_t a = h.unit(x, 1.0, shift);
                std::size_t b = h.unit(x, -1.0, shift);
                knot[k].add(a, 1.0).add(b, 1.0);
            } else {
                knot[k].add(h.unit(u, 1.0, shift), 1.0);
            }
        }
        LinExpr next_acc;
        if (done == 0) {
            next_acc = knot[0];  // |x|
        } else {
            next_acc.add(h.unit(acc), 1.0);
        }
        LinExpr next_u;
        for (long k = 0; k < knots; ++k) {
            double c_u = tooth_slope(r, r, k) - (k ? tooth_slope(r, r, k - 1) : 0.0);
            double c_a = 0.0;
            for (int q = 1; q <= r; ++q) {
                double dq = tooth_slope(q, r, k) - (k ? tooth_slope(q, r, k - 1) : 0.0);
                c_a -= std::ldexp(dq, -2 * (done + q));
            }
            for (const auto& [col, v] : knot[k].terms) {
                if (c_u != 0.0) next_u.add(col, c_u * v);
                if (c_a != 0.0) next_acc.add(col, c_a * v);
            }
        }
        cols = h.size();
        layers.push_back(h.build());
        u = next_u;
        acc = next_acc;
        done += r;
    }
    layers.push_back(detail::output_layer(cols, {acc}));
    return ReluNetwork(1, std::move(layers), "square");
}

ReluNetwork product2_net_teeth(int teeth, int m, double a) {
    if (!(a > 0.0)) throw std::invalid_argument("product2: a must be positive");
    ReluNetwork psi = square_net_teeth(teeth, m);
    const auto& pl = psi.layers();
    double in_scale = 1.0 / (2.0 * a);
    double out_scale = 2.0 * a * a;
    std::vector<Layer> layers;
    // units interleaved as (A_j, B_j, C_j) for psi((x+y)/2a), psi(x/2a), psi(y/2a)
    for (std::size_t t = 0; t < pl.size(); ++t) {
        const auto& src = pl[t];
        bool last = t + 1 == pl.size();
        std::vector<SparseMatrix::Entry> e;
        std::vector<double> b;
        if (t == 0) {
            for (std::size_t r = 0; r < src.w.rows; ++r) {
                double w = src.w.at(r, 0) * in_scale;
                e.push_back({3 * r, 0, w});
                e.push_back({3 * r, 1, w});
                e.push_back({3 * r + 1, 0, w});
                e.push_back({3 * r + 2, 1, w});
                b.insert(b.end(), {src.b[r], src.b[r], src.b[r]});
            }
            layers.push_back({SparseMatrix::from_entries(3 * src.w.rows, 2, std::move(e)), std::move(b)});
        } else if (!last) {
            for (const auto& en : src.w.entries())
                for (std::size_t c = 0; c < 3; ++c) e.push_back({3 * en.r + c, 3 * en.c + c, en.v});
            for (double v : src.b) b.insert(b.end(), {v, v, v});
            layers.push_back({SparseMatrix::from_entries(3 * src.w.rows, 3 * src.w.cols, std::move(e)), std::move(b)});
        } else {
            for (const auto& en : src.w.entries()) {
                double w = en.v * out_scale;
                e.push_back({0, 3 * en.c, w});
                e.push_back({0, 3 * en.c + 1, -w});
                e.push_back({0, 3 * en.c + 2, -w});
            }
            b.push_back(-src.b[0] * out_scale);
            layers.push_back({SparseMatrix::from_entries(1, 3 * src.w.cols, std::move(e)), std::move(b)});
        }
    }
    return ReluNetwork(2, std::move(layers), "product2");
}

ReluNetwork product2_net(const ProductBudget& b) {
    b.validate();
    double lg = b.L * std::log2(double(b.N));
    // the value contract needs the square teeth, the gradient contract 2a 2^-t <= 6a^2 N^-L
    int grad_teeth = static_cast<int>(std::ceil(lg - std::log2(3.0 * b.a) - 1e-12));
    int teeth = std::max(square_teeth(b.N, b.L), grad_teeth);
    return product2_net_teeth(teeth, detail::bits_for(b.N), b.a);
}

double multi_product_bound(const ProductBudget& b) {
    return 10.0 * (b.s - 1) * std::pow(double(b.N + 1), -7.0 * b.s * b.L);
}

ReluNetwork multi_product_net(const ProductBudget& b) {
    b.validate();
    ReluNetwork p = product2_net({b.N + 1, 7 * b.s * b.L, 1.0, 2});
    ReluNetwork net;
    for (int k = 2; k <= b.s; ++k) {
        int rest = b.s - k;
        ReluNetwork stage = rest ? parallel({p, identity_net(rest)}, false) : p;
        net = k == 2 ? stage : compose(net, stage);
    }
    return net.renamed("multi_product");
}

}  // namespace kornet
