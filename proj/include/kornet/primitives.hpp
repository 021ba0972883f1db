#pragma once

#include <vector>

#include "kornet/relu_net.hpp"
#include "kornet/sparse_grid.hpp"

namespace kornet {

struct ProductBudget {
    int N = 1;
    int L = 1;
    double a = 1.0;  // inputs lie in (-a, a)
    int s = 2;       // arity of multi_product_net

    void validate() const;
};

struct BitExtractSpec {
    std::vector<double> values;
    int N = 1;
    int L = 1;
    int s = 1;

    void validate() const;
};

// Continuous piecewise-linear scalar map through (knots[k], values[k]),
// constant beyond the first and last knot. One hidden layer, one unit per knot.
ReluNetwork pwl_net(const std::vector<double>& knots, const std::vector<double>& values);

// Period-1 tent iterate T_j on [lo, hi] (integers), zero outside. Up to
// `bits_per_layer` tooth doublings are folded into each hidden layer.
ReluNetwork sawtooth_net(int j, int lo, int hi, int bits_per_layer);

ReluNetwork teeth_net(int i);
// teeth used by square_net(N, L)
int square_teeth(int N, int L);
ReluNetwork square_net(int N, int L);
// |x| - sum_{i<=teeth} T_i(|x|) / 4^i with the given tooth doublings per layer
ReluNetwork square_net_teeth(int teeth, int bits_per_layer);

ReluNetwork product2_net(const ProductBudget& b);
// product2 with an explicit tooth count
ReluNetwork product2_net_teeth(int teeth, int bits_per_layer, double a);
ReluNetwork multi_product_net(const ProductBudget& b);
// 10(s-1)(N+1)^(-7sL)
double multi_product_bound(const ProductBudget& b);

ReluNetwork hat1d_net(int l, int i);
// hat in coordinate j of an input in R^d
ReluNetwork hat_coord_net(int l, int i, int d, int j);
ReluNetwork grid_basis_net(const LevelIndex& l, const PositionIndex& i, int N, int L);

// sum_k [sigma((x - b_k + w)/w) - sigma((x - b_k)/w)] for increasing breakpoints b_k,
// `per_layer` ramps per hidden layer with x and the partial sum carried along.
ReluNetwork staircase_net(const std::vector<double>& breaks, double ramp_width, int per_layer);
ReluNetwork step_net(int K, double delta, int N, int L);

ReluNetwork bit_extract_net(const BitExtractSpec& spec);
// bits kept per value
int bit_extract_bits(const BitExtractSpec& spec);

ReluNetwork periodic_hat_train_net(int l, int N, int L);
double periodic_hat_train(int l, double x);

// trapezoid partition of unity on cells of size 1/K; m entries in {1, 2}
double partition_ref(int m, int K, double x);
double partition_ref_slope(int m, int K, double x);
double partition_ref(const std::vector<int>& m, int K, const Point& x);
bool in_omega(int m, int K, double x);
ReluNetwork partition_net(const std::vector<int>& m, int K, int N, int L);

// mid(a, b, c) of three inputs, two hidden layers
ReluNetwork mid3_net();
double mid3(double a, double b, double c);

enum class ExtendRule {
    // clamp the center value into [min(shifted) - slack, max(shifted) + slack]
    clamp_to_neighbors,
    // plain median of the three shifted copies
    median_of_shifts,
};

// Extends a net that is accurate on the trimmed region to the whole cube by
// combining copies shifted by +-shift along each coordinate in turn.
ReluNetwork mid_extend_net(const ReluNetwork& net, int K, double shift, int d, double slack,
                           ExtendRule rule = ExtendRule::clamp_to_neighbors);

}  // namespace kornet
