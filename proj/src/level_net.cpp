#include <cmath>
#include <stdexcept>

#include "builder.hpp"
#include "kornet/synthesis.hpp"

namespace kornet {

namespace {

// scalar net applied to coordinate j of R^d
ReluNetwork on_coordinate(const ReluNetwork& scalar, int d, int j) {
    std::vector<std::vector<double>> w(1, std::vector<double>(d, 0.0));
    w[0][j] = 1.0;
    return compose(affine_net(w, {0.0}), scalar);
}

// smallest L' >= start with N^2 L'^2 >= count
int layers_for(long count, int N, int start) {
    int L = std::max(1, start);
    while (double(N) * N * L * L < double(count)) ++L;
    return L;
}

double pow2_ceil(double v) { return std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(v) - 1e-12))); }

}  // namespace

ReluNetwork synth_level_net(const PQFactor& pq, const SynthesisBudget& b) {
    b.validate();
    const int d = static_cast<int>(pq.cells.size());
    if (d != b.d) throw SynthesisError("level net: dimension differs from budget");
    for (int lr : pq.level.l)
        if (lr > b.n) throw SynthesisError("level net: level finer than the truncation level");
    const double lg = std::log2(double(b.N) * b.L);
    const double delta = b.delta();

    // cell number eta = sum_r c_r * stride_r from one step net per refined coordinate
    long M = 1;
    std::vector<ReluNetwork> steps;
    std::vector<double> strides;
    for (int r = 0; r < d; ++r) {
        int K = pq.cells[r];
        if (K > 1) {
            int step_start = static_cast<int>(std::ceil(pq.level.l[r] / (2.0 * std::max(lg, 1.0))));
            int Lr = layers_for(K, b.N, step_start);
            steps.push_back(on_coordinate(step_net(K, delta, b.N, Lr), d, r));
            strides.push_back(double(M));
        }
        M *= K;
    }

    ReluNetwork s_net;
    if (M == 1) {
        s_net = constant_net(d, pq.q[0]);
    } else {
        ReluNetwork eta = map_output(parallel(steps, true), {strides}, {0.0});
        std::vector<double> xi(M);
        for (long c = 0; c < M; ++c) xi[c] = pq.xi(c);
        BitExtractSpec spec{xi, b.N, layers_for(M, b.N, b.L), b.s};
        s_net = compose(eta, map_output(bit_extract_net(spec), {{2.0 * pq.C}}, {-pq.C}));
    }

    // hat-train product
    ReluNetwork w_net;
    if (d == 1) {
        w_net = periodic_hat_train_net(pq.level.l[0], b.N, b.L);
    } else {
        std::vector<ReluNetwork> trains;
        for (int r = 0; r < d; ++r) trains.push_back(on_coordinate(periodic_hat_train_net(pq.level.l[r], b.N, b.L), d, r));
        w_net = compose(parallel(trains, true), multi_product_net({b.N, b.L, 1.0, d}));
    }

    // |s| <= C up to the memorization error, 0 <= w <= 1
    double a = pow2_ceil(std::max(1.0, 1.01 * pq.C));
    // the gradient error 2a 2^-t meets hat slopes up to 2^n
    int teeth = static_cast<int>(std::ceil(std::log2(a) + b.n + 2.0 * lg)) + 5;
    ReluNetwork prod = product2_net_teeth(teeth, detail::bits_for(b.N), a);
    return compose(parallel({s_net, w_net}, true), prod).renamed("level_net");
}

ReluNetwork synth_level_net(const SurplusTable& t, const LevelIndex& l, const SynthesisBudget& b, double seminorm) {
    return synth_level_net(pq_decompose(t, l, seminorm), b);
}

}  // namespace kornet
