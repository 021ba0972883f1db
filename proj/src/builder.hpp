#pragma once

// Small helpers for assembling layers by hand.

#include <cmath>
#include <vector>

#include "kornet/relu_net.hpp"

namespace kornet::detail {

// Affine expression over the units of some layer.
struct LinExpr {
    std::vector<std::pair<std::size_t, double>> terms;
    double bias = 0.0;

    LinExpr& add(std::size_t col, double v) {
        terms.emplace_back(col, v);
        return *this;
    }
};

class LayerBuilder {
public:
    explicit LayerBuilder(std::size_t cols) : cols_(cols) {}

    // adds a unit computing sigma(scale * e + shift)
    std::size_t unit(const LinExpr& e, double scale = 1.0, double shift = 0.0) {
        std::size_t r = bias_.size();
        for (const auto& [c, v] : e.terms) entries_.push_back({r, c, scale * v});
        bias_.push_back(scale * e.bias + shift);
        return r;
    }
    // carried scalar as the pair (sigma(e), sigma(-e)); returns the index of the first
    std::size_t pair(const LinExpr& e) {
        std::size_t r = unit(e, 1.0);
        unit(e, -1.0);
        return r;
    }
    std::size_t size() const { return bias_.size(); }
    Layer build() { return {SparseMatrix::from_entries(bias_.size(), cols_, std::move(entries_)), std::move(bias_)}; }

private:
    std::size_t cols_;
    std::vector<SparseMatrix::Entry> entries_;
    std::vector<double> bias_;
};

inline LinExpr pair_value(std::size_t first) { return LinExpr{}.add(first, 1.0).add(first + 1, -1.0); }

inline LinExpr single(std::size_t col, double v = 1.0) { return LinExpr{}.add(col, v); }

inline Layer output_layer(std::size_t cols, const std::vector<LinExpr>& outs) {
    std::vector<SparseMatrix::Entry> e;
    std::vector<double> bias;
    for (std::size_t r = 0; r < outs.size(); ++r) {
        for (const auto& [c, v] : outs[r].terms) e.push_back({r, c, v});
        bias.push_back(outs[r].bias);
    }
    return {SparseMatrix::from_entries(outs.size(), cols, std::move(e)), std::move(bias)};
}

inline int floor_log2(long v) {
    int k = 0;
    while ((2L << k) <= v) ++k;
    return k;
}

inline bool is_pow2(long v) { return v > 0 && (v & (v - 1)) == 0; }

// tooth doublings per layer for a width parameter N
inline int bits_for(int N) { return std::max(1, floor_log2(N)); }

}  // namespace kornet::detail
