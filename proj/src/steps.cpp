#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/primitives.hpp"

namespace kornet {

using detail::LayerBuilder;
using detail::LinExpr;

ReluNetwork staircase_net(const std::vector<double>& breaks, double w, int per_layer) {
    if (!(w > 0.0) || per_layer < 1) throw std::invalid_argument("staircase_net: bad ramp width or chunk size");
    for (std::size_t k = 1; k < breaks.size(); ++k)
        if (!(breaks[k] > breaks[k - 1])) throw std::invalid_argument("staircase_net: breakpoints must increase");
    if (breaks.empty()) return constant_net(1, 0.0).renamed("staircase");
    double inv = 1.0 / w;
    std::vector<Layer> layers;
    LinExpr x = detail::single(0);
    LinExpr sum;  // partial sum over the previous layer
    std::size_t cols = 1;
    for (std::size_t start = 0; start < breaks.size(); start += per_layer) {
        std::size_t stop = std::min(breaks.size(), start + per_layer);
        LayerBuilder h(cols);
        LinExpr next_sum;
        if (start > 0) next_sum.add(h.unit(sum), 1.0);
        for (std::size_t k = start; k < stop; ++k) {
            double shift = -breaks[k] * inv;
            std::size_t a = h.unit(x, inv, shift + 1.0);
            std::size_t b = h.unit(x, inv, shift);
            next_sum.add(a, 1.0).add(b, -1.0);
        }
        LinExpr next_x;
        if (stop < breaks.size()) next_x = detail::pair_value(h.pair(x));
        cols = h.size();
        layers.push_back(h.build());
        x = next_x;
        sum = next_sum;
    }
    layers.push_back(detail::output_layer(cols, {sum}));
    return ReluNetwork(1, std::move(layers), "staircase");
}

ReluNetwork step_net(int K, double delta, int N, int L) {
    if (K < 1 || N < 1 || L < 1) throw std::invalid_argument("step_net: K, N, L must be >= 1");
    if (double(K) > double(N) * N * L * L) throw std::invalid_argument("step_net: K exceeds N^2 L^2");
    if (!(delta > 0.0) || delta > 1.0 / (3.0 * K)) throw std::invalid_argument("step_net: delta must lie in (0, 1/(3K)]");
    std::vector<double> breaks;
    for (int k = 1; k < K; ++k) breaks.push_back(double(k) / K);
    int per_layer = std::max(2 * N, static_cast<int>(std::ceil((K - 1) / (4.0 * L + 3.0))));
    return staircase_net(breaks, delta, per_layer).renamed("step");
}

void BitExtractSpec::validate() const {
    if (N < 1 || L < 1 || s < 1) throw std::invalid_argument("bit extraction needs N, L, s >= 1");
    if (values.empty()) throw std::invalid_argument("bit extraction needs at least one value");
    if (double(values.size()) > double(N) * N * L * L)
        throw std::invalid_argument("bit extraction: more values than N^2 L^2");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("bit extraction values must lie in [0,1]");
}

int bit_extract_bits(const BitExtractSpec& spec) {
    return static_cast<int>(std::ceil(2.0 * spec.s * std::log2(double(spec.N) * spec.L) - 1e-12)) + 1;
}

ReluNetwork bit_extract_net(const BitExtractSpec& spec) {
    spec.validate();
    const auto& xi = spec.values;
    if (std::all_of(xi.begin(), xi.end(), [&](double v) { return v == xi[0]; }))
        return constant_net(1, xi[0]).renamed("bit_extract");

    const int B = bit_extract_bits(spec);
    const long M = static_cast<long>(xi.size());
    const long G = std::min<long>(52, static_cast<long>(std::ceil(std::sqrt(double(M)))));
    const long R = (M + G - 1) / G;
    const double top = std::ldexp(1.0, B);

    std::vector<long long> q(M);
    for (long i = 0; i < M; ++i) q[i] = std::min<long long>(std::llround(xi[i] * top), (1LL << B) - 1);
    // Y[g][b]: bits of plane b for the members of group g, first member in the leading place
    std::vector<std::vector<double>> Y(R, std::vector<double>(B, 0.0));
    for (long i = 0; i < M; ++i)
        for (int b = 0; b < B; ++b)
            if ((q[i] >> (B - 1 - b)) & 1) Y[i / G][b] += std::ldexp(1.0, -static_cast<int>(i % G) - 1);

    std::vector<Layer> layers;
    // group selection: u_g = [x >= gG] at integers
    LayerBuilder h0(1);
    LinExpr x = detail::single(0);
    std::vector<LinExpr> y(B);
    LinExpr r;
    for (int b = 0; b < B; ++b) y[b].bias = Y[0][b];
    std::size_t xp = h0.pair(x);
    r.add(xp, 1.0).add(xp + 1, -1.0);
    for (long g = 1; g < R; ++g) {
        std::size_t p = h0.unit(x, 1.0, -double(g * G) + 1.0);
        std::size_t qq = h0.unit(x, 1.0, -double(g * G));
        r.add(p, -double(G)).add(qq, double(G));
        for (int b = 0; b < B; ++b) {
            double dY = Y[g][b] - Y[g - 1][b];
            if (dY != 0.0) y[b].add(p, dY).add(qq, -dY);
        }
    }
    std::size_t cols = h0.size();
    layers.push_back(h0.build());

    const double scale = std::ldexp(1.0, static_cast<int>(G));
    // acc[b]: sum of the AND units of earlier steps, as an expression over the previous layer
    std::vector<LinExpr> bit(B), acc(B);
    LinExpr ind;
    for (long t = 0; t <= G; ++t) {
        LayerBuilder h(cols);
        std::vector<LinExpr> next_acc(B), next_y(B), next_bit(B);
        LinExpr next_r, next_ind;
        for (int b = 0; b < B; ++b) {
            if (!acc[b].terms.empty()) next_acc[b].add(h.unit(acc[b]), 1.0);
            if (t > 0) {
                // bit of step t-1 AND (r == t-1)
                LinExpr both = bit[b];
                for (const auto& [c, v] : ind.terms) both.add(c, v);
                both.bias = bit[b].bias + ind.bias - 1.0;
                next_acc[b].add(h.unit(both), 1.0);
            }
            if (t < G) {
                std::size_t p = h.unit(y[b], scale, -0.5 * scale + 1.0);
                std::size_t qq = h.unit(y[b], scale, -0.5 * scale);
                next_bit[b].add(p, 1.0).add(qq, -1.0);
                if (t + 1 < G) {
                    std::size_t yc = h.unit(y[b]);
                    next_y[b].add(yc, 2.0).add(p, -1.0).add(qq, 1.0);
                }
            }
        }
        if (t < G) {
            std::size_t a = h.unit(r, 1.0, -double(t) + 1.0);
            std::size_t b2 = h.unit(r, 1.0, -double(t));
            std::size_t c = h.unit(r, 1.0, -double(t) - 1.0);
            next_ind.add(a, 1.0).add(b2, -2.0).add(c, 1.0);
            if (t + 1 < G) next_r.add(h.unit(r), 1.0);
        }
        cols = h.size();
        layers.push_back(h.build());
        acc = next_acc;
        y = next_y;
        bit = next_bit;
        ind = next_ind;
        r = next_r;
    }
    // z = sum_b 2^-(b+1) acc_b, then clamp to [0,1]
    LinExpr z;
    for (int b = 0; b < B; ++b) {
        double w = std::ldexp(1.0, -(b + 1));
        for (const auto& [c, v] : acc[b].terms) z.add(c, w * v);
    }
    LayerBuilder hc(cols);
    std::size_t lo = hc.unit(z);
    std::size_t hi = hc.unit(z, 1.0, -1.0);
    layers.push_back(hc.build());
    layers.push_back(detail::output_layer(2, {LinExpr{}.add(lo, 1.0).add(hi, -1.0)}));
    return ReluNetwork(1, std::move(layers), "bit_extract");
}

}  // namespace kornet
