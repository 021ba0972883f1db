#include <cmath>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/primitives.hpp"

namespace kornet {

using detail::LayerBuilder;
using detail::LinExpr;

ReluNetwork hat_coord_net(int l, int i, int d, int j) {
    if (l < 1 || i < 1 || i > (1 << l) - 1) throw std::invalid_argument("hat net: position outside level");
    if (j < 0 || j >= d) throw std::invalid_argument("hat net: coordinate out of range");
    double s = std::ldexp(1.0, l);
    LayerBuilder h(d);
    LinExpr u = detail::single(j, s);
    // sigma(u+1) - 2 sigma(u) + sigma(u-1) with u = x/h - i
    std::size_t a = h.unit(u, 1.0, -(i - 1.0));
    std::size_t b = h.unit(u, 1.0, -double(i));
    std::size_t c = h.unit(u, 1.0, -(i + 1.0));
    return ReluNetwork(d, {h.build(), detail::output_layer(3, {LinExpr{}.add(a, 1).add(b, -2).add(c, 1)})}, "hat1d");
}

ReluNetwork hat1d_net(int l, int i) { return hat_coord_net(l, i, 1, 0); }

ReluNetwork grid_basis_net(const LevelIndex& l, const PositionIndex& i, int N, int L) {
    if (!valid_position(l, i)) throw std::invalid_argument("grid_basis_net: invalid index pair");
    int d = static_cast<int>(l.dim());
    if (d == 1) return hat1d_net(l.l[0], i.i[0]).renamed("grid_basis");
    std::vector<ReluNetwork> hats;
    for (int j = 0; j < d; ++j) hats.push_back(hat_coord_net(l.l[j], i.i[j], d, j));
    // hats are nonnegative, so their outputs can sit in a hidden layer; the product then
    // sees an exact zero instead of a fused sum that only cancels approximately
    auto layers = parallel(hats, true).layers();
    layers.push_back(Layer{SparseMatrix::identity(d), std::vector<double>(d, 0.0)});
    ReluNetwork net = compose(ReluNetwork(d, std::move(layers), "hats"), multi_product_net({N, L, 1.0, d}));
    return net.renamed("grid_basis");
}

ReluNetwork periodic_hat_train_net(int l, int N, int L) {
    if (l < 1 || N < 1 || L < 1) throw std::invalid_argument("periodic_hat_train_net: bad arguments");
    return sawtooth_net(l, 0, 1, detail::bits_for(N)).renamed("periodic_hat_train");
}

double periodic_hat_train(int l, double x) {
    double s = 0.0;
    for (int k = 1; k < (1 << l); k += 2) s += hat1d(l, k, x);
    return s;
}

double partition_ref(int m, int K, double x) {
    double y = x + (m == 2 ? 0.5 / K : 0.0);
    double t = (y - std::floor(y * K) / K) * K;  // position inside the cell, in [0,1)
    if (t <= 0.25) return 4.0 * t;
    if (t <= 0.5) return 1.0;
    if (t <= 0.75) return 4.0 * (0.75 - t);
    return 0.0;
}

double partition_ref_slope(int m, int K, double x) {
    double y = x + (m == 2 ? 0.5 / K : 0.0);
    double t = (y - std::floor(y * K) / K) * K;
    if (t < 0.25) return 4.0 * K;
    if (t < 0.5) return 0.0;
    if (t < 0.75) return -4.0 * K;
    return 0.0;
}

double partition_ref(const std::vector<int>& m, int K, const Point& x) {
    double v = 1.0;
    for (std::size_t j = 0; j < m.size(); ++j) v *= partition_ref(m[j], K, x[j]);
    return v;
}

bool in_omega(int m, int K, double x) {
    double y = x + (m == 2 ? 0.5 / K : 0.0);
    double t = y * K - std::floor(y * K);
    return t <= 0.75;
}

namespace {

// g_m on [0,1]: G(T_{k+1}(x + shift)) with G(u) = sigma(2u - 1/2) - sigma(2u - 3/2)
ReluNetwork partition_1d(int m, int K, int N, int d, int j) {
    int k = detail::floor_log2(K);
    double shift = (m == 1 ? 1.0 : 5.0) / (8.0 * K);
    ReluNetwork saw = sawtooth_net(k + 1, 0, 2, detail::bits_for(N));
    std::vector<std::vector<double>> pick(1, std::vector<double>(d, 0.0));
    pick[0][j] = 1.0;
    ReluNetwork shifted = compose(affine_net(pick, {shift}), saw);
    LayerBuilder h(1);
    std::size_t a = h.unit(detail::single(0), 2.0, -0.5);
    std::size_t b = h.unit(detail::single(0), 2.0, -1.5);
    ReluNetwork clip(1, {h.build(), detail::output_layer(2, {LinExpr{}.add(a, 1).add(b, -1)})});
    return compose(shifted, clip);
}

}  // namespace

ReluNetwork partition_net(const std::vector<int>& m, int K, int N, int L) {
    if (m.empty()) throw std::invalid_argument("partition_net: empty m");
    for (int v : m)
        if (v != 1 && v != 2) throw std::invalid_argument("partition_net: m entries must be 1 or 2");
    if (!detail::is_pow2(K)) throw std::invalid_argument("partition_net: K must be a power of two");
    if (N < 1 || L < 1) throw std::invalid_argument("partition_net: N, L must be >= 1");
    int d = static_cast<int>(m.size());
    if (d == 1) return partition_1d(m[0], K, N, 1, 0).renamed("partition");
    std::vector<ReluNetwork> parts;
    for (int j = 0; j < d; ++j) parts.push_back(partition_1d(m[j], K, N, d, j));
    return compose(parallel(parts, true), multi_product_net({N, L, 1.0, d})).renamed("partition");
}

}  // namespace kornet
