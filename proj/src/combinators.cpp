#include <algorithm>

#include "kornet/relu_net.hpp"

namespace kornet {

using Entry = SparseMatrix::Entry;

ReluNetwork affine_net(const std::vector<std::vector<double>>& w, const std::vector<double>& b) {
    if (w.empty()) throw std::invalid_argument("affine_net: empty matrix");
    return ReluNetwork(w[0].size(), {Layer{SparseMatrix::from_dense(w), b}}, "affine");
}

ReluNetwork identity_net(std::size_t dim) {
    return ReluNetwork(dim, {Layer{SparseMatrix::identity(dim), std::vector<double>(dim, 0.0)}}, "identity");
}

ReluNetwork constant_net(std::size_t input_dim, double value) {
    return ReluNetwork(input_dim, {Layer{SparseMatrix(1, input_dim), {value}}}, "constant");
}

ReluNetwork pad_depth(const ReluNetwork& net, std::size_t extra) {
    if (extra == 0) return net;
    auto layers = net.layers();
    Layer out = layers.back();
    layers.pop_back();
    std::size_t k = out.w.rows, c = out.w.cols;
    // y -> (sigma(y), sigma(-y))
    std::vector<Entry> e;
    for (const auto& en : out.w.entries()) {
        e.push_back({en.r, en.c, en.v});
        e.push_back({en.r + k, en.c, -en.v});
    }
    std::vector<double> b(2 * k);
    for (std::size_t r = 0; r < k; ++r) {
        b[r] = out.b[r];
        b[r + k] = -out.b[r];
    }
    layers.push_back({SparseMatrix::from_entries(2 * k, c, std::move(e)), std::move(b)});
    for (std::size_t t = 1; t < extra; ++t)
        layers.push_back({SparseMatrix::identity(2 * k), std::vector<double>(2 * k, 0.0)});
    std::vector<Entry> o;
    for (std::size_t r = 0; r < k; ++r) {
        o.push_back({r, r, 1.0});
        o.push_back({r, r + k, -1.0});
    }
    layers.push_back({SparseMatrix::from_entries(k, 2 * k, std::move(o)), std::vector<double>(k, 0.0)});
    return ReluNetwork(net.input_dim(), std::move(layers), net.construction());
}

ReluNetwork compose(const ReluNetwork& inner, const ReluNetwork& outer) {
    if (inner.output_dim() != outer.input_dim()) throw std::invalid_argument("compose: dimension mismatch");
    std::vector<Layer> layers(inner.layers().begin(), inner.layers().end() - 1);
    const Layer& li = inner.layers().back();
    const Layer& lo = outer.layers().front();
    Layer fused{matmul(lo.w, SparseMatrix::from_entries(li.w.rows, li.w.cols, li.w.entries())), lo.b};
    for (std::size_t r = 0; r < lo.w.rows; ++r)
        for (auto k = lo.w.row_ptr[r]; k < lo.w.row_ptr[r + 1]; ++k) fused.b[r] += lo.w.val[k] * li.b[lo.w.col[k]];
    layers.push_back(std::move(fused));
    layers.insert(layers.end(), outer.layers().begin() + 1, outer.layers().end());
    return ReluNetwork(inner.input_dim(), std::move(layers), outer.construction());
}

ReluNetwork map_output(const ReluNetwork& net, const std::vector<std::vector<double>>& w,
                       const std::vector<double>& b) {
    return compose(net, affine_net(w, b)).renamed(net.construction());
}

ReluNetwork parallel(const std::vector<ReluNetwork>& nets, bool shared_input) {
    if (nets.empty()) throw std::invalid_argument("parallel: empty list");
    std::size_t depth = 0;
    for (const auto& n : nets) {
        depth = std::max(depth, n.depth());
        if (shared_input && n.input_dim() != nets[0].input_dim())
            throw std::invalid_argument("parallel: shared input needs equal input dims");
    }
    std::vector<ReluNetwork> padded;
    for (const auto& n : nets) padded.push_back(pad_depth(n, depth - n.depth()));

    std::size_t in_dim = 0;
    for (const auto& n : padded) in_dim = shared_input ? n.input_dim() : in_dim + n.input_dim();
    std::vector<Layer> layers;
    for (std::size_t t = 0; t <= depth; ++t) {
        std::vector<Entry> e;
        std::vector<double> b;
        std::size_t row_off = 0, col_off = 0;
        for (const auto& n : padded) {
            const Layer& l = n.layers()[t];
            for (const auto& en : l.w.entries()) e.push_back({en.r + row_off, en.c + col_off, en.v});
            b.insert(b.end(), l.b.begin(), l.b.end());
            row_off += l.w.rows;
            if (t > 0 || !shared_input) col_off += l.w.cols;
        }
        std::size_t cols = t == 0 ? in_dim : layers.back().w.rows;
        layers.push_back({SparseMatrix::from_entries(row_off, cols, std::move(e)), std::move(b)});
    }
    return ReluNetwork(in_dim, std::move(layers), "parallel");
}

ReluNetwork with_input_carry(const ReluNetwork& net) {
    return parallel({net, identity_net(net.input_dim())}, true).renamed(net.construction());
}

// Hidden layout per stage: [stage units | x+ x- (unless last stage) | s+ s- (unless first stage)].
ReluNetwork sum_chain(const std::vector<ReluNetwork>& nets_in) {
    if (nets_in.empty()) throw std::invalid_argument("sum_chain: empty list");
    std::size_t d = nets_in[0].input_dim();
    std::vector<ReluNetwork> nets;
    for (const auto& n : nets_in) {
        if (n.input_dim() != d) throw std::invalid_argument("sum_chain: mixed input dims");
        if (n.output_dim() != 1) throw std::invalid_argument("sum_chain: nets must have scalar output");
        nets.push_back(n.depth() == 0 ? pad_depth(n, 1) : n);
    }
    std::size_t K = nets.size();
    std::vector<Layer> layers;
    // column positions of the carried channels in the previous layer
    std::size_t prev_units = 0, prev_x = 0, prev_s = 0;
    bool prev_has_s = false;

    for (std::size_t k = 0; k < K; ++k) {
        const auto& nl = nets[k].layers();
        std::size_t D = nets[k].depth();
        bool carry_x = k + 1 < K;
        bool carry_s = k > 0;
        for (std::size_t t = 0; t < D; ++t) {
            const Layer& src = nl[t];
            std::size_t units = src.w.rows;
            std::size_t x_pos = units, s_pos = units + (carry_x ? 2 * d : 0);
            std::size_t rows = s_pos + (carry_s ? 2 : 0);
            std::size_t cols = (k == 0 && t == 0) ? d : layers.back().w.rows;
            std::vector<Entry> e;
            std::vector<double> b(rows, 0.0);
            for (std::size_t r = 0; r < units; ++r) b[r] = src.b[r];
            if (k == 0 && t == 0) {
                for (const auto& en : src.w.entries()) e.push_back(en);
                for (std::size_t j = 0; j < d && carry_x; ++j) {
                    e.push_back({x_pos + j, j, 1.0});
                    e.push_back({x_pos + d + j, j, -1.0});
                }
            } else if (t == 0) {
                // input x_j = x+_j - x-_j from the previous stage
                for (const auto& en : src.w.entries()) {
                    e.push_back({en.r, prev_x + en.c, en.v});
                    e.push_back({en.r, prev_x + d + en.c, -en.v});
                }
                for (std::size_t j = 0; j < 2 * d && carry_x; ++j) e.push_back({x_pos + j, prev_x + j, 1.0});
                // s = s_prev + out_{k-1}
                const Layer& out = nets[k - 1].layers().back();
                for (int sign : {1, -1}) {
                    std::size_t r = s_pos + (sign == 1 ? 0 : 1);
                    for (const auto& en : out.w.entries()) e.push_back({r, en.c, sign * en.v});
                    if (prev_has_s) {
                        e.push_back({r, prev_s, sign * 1.0});
                        e.push_back({r, prev_s + 1, sign * -1.0});
                    }
                    b[r] = sign * out.b[0];
                }
            } else {
                for (const auto& en : src.w.entries()) e.push_back({en.r, prev_units + en.c, en.v});
                for (std::size_t j = 0; j < 2 * d && carry_x; ++j) e.push_back({x_pos + j, prev_x + j, 1.0});
                if (carry_s) {
                    e.push_back({s_pos, prev_s, 1.0});
                    e.push_back({s_pos + 1, prev_s + 1, 1.0});
                }
            }
            layers.push_back({SparseMatrix::from_entries(rows, cols, std::move(e)), std::move(b)});
            prev_units = 0;
            prev_x = x_pos;
            prev_s = s_pos;
            prev_has_s = carry_s;
        }
    }
    const Layer& out = nets.back().layers().back();
    std::vector<Entry> e = out.w.entries();
    if (prev_has_s) {
        e.push_back({0, prev_s, 1.0});
        e.push_back({0, prev_s + 1, -1.0});
    }
    layers.push_back({SparseMatrix::from_entries(1, layers.back().w.rows, std::move(e)), out.b});
    return ReluNetwork(d, std::move(layers), "sum_chain");
}

}  // namespace kornet
