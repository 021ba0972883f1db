#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace kornet {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row-compressed matrix. Entries within a row are kept in increasing column
// order, and forward/backward passes accumulate in that order. Several
// constructions rely on this for exact cancellation.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    struct Entry {
        std::size_t r, c;
        double v;
    };

    SparseMatrix() = default;
    SparseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), row_ptr(r + 1, 0) {}

    // Duplicates are summed, exact zeros dropped.
    static SparseMatrix from_entries(std::size_t r, std::size_t c, std::vector<Entry> entries);
    static SparseMatrix from_dense(const std::vector<std::vector<double>>& dense);
    static SparseMatrix identity(std::size_t n, double scale = 1.0);

    std::vector<std::vector<double>> to_dense() const;
    double at(std::size_t r, std::size_t c) const;
    std::size_t nnz() const { return val.size(); }
    std::vector<Entry> entries() const;
};

// this * rhs
SparseMatrix matmul(const SparseMatrix& lhs, const SparseMatrix& rhs);

struct Layer {
    SparseMatrix w;
    std::vector<double> b;
};

class ReluNetwork {
public:
    ReluNetwork() = default;
    ReluNetwork(std::size_t input_dim, std::vector<Layer> layers, std::string construction = "");

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const;
    const std::vector<Layer>& layers() const { return layers_; }

    // number of hidden layers
    std::size_t depth() const { return layers_.empty() ? 0 : layers_.size() - 1; }
    // largest hidden layer, 0 for an affine map
    std::size_t width() const;
    // dense count: sum of rows*cols + rows
    std::uint64_t params() const;
    std::size_t nnz() const;

    const std::string& construction() const { return construction_; }
    ReluNetwork renamed(std::string name) const;

private:
    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
    std::string construction_;
};

struct EvalResult {
    std::vector<double> value;
    // 1 where the hidden pre-activation is > 0, one entry per hidden unit
    std::vector<std::uint8_t> pattern;
};

std::vector<double> forward(const ReluNetwork& net, const std::vector<double>& x);
EvalResult evaluate(const ReluNetwork& net, const std::vector<double>& x, bool record_pattern);
// Scalar-output nets only. sigma'(0) is taken as 0.
std::vector<double> gradient(const ReluNetwork& net, const std::vector<double>& x);

// Reusable scratch buffers for tight evaluation loops over a scalar-output net.
class Evaluator {
public:
    explicit Evaluator(const ReluNetwork& net);
    double value(const double* x);
    double value_and_gradient(const double* x, double* grad);

private:
    const ReluNetwork* net_;
    std::vector<std::vector<double>> acts_;
    std::vector<double> g_, g_prev_;
};

ReluNetwork affine_net(const std::vector<std::vector<double>>& w, const std::vector<double>& b);
ReluNetwork identity_net(std::size_t dim);
ReluNetwork constant_net(std::size_t input_dim, double value);

// Appends identity stages so the net gains `extra` hidden layers.
ReluNetwork pad_depth(const ReluNetwork& net, std::size_t extra);
ReluNetwork compose(const ReluNetwork& inner, const ReluNetwork& outer);
ReluNetwork parallel(const std::vector<ReluNetwork>& nets, bool shared_input);
ReluNetwork sum_chain(const std::vector<ReluNetwork>& nets);
// Applies an affine map to the outputs of the net (no extra depth).
ReluNetwork map_output(const ReluNetwork& net, const std::vector<std::vector<double>>& w,
                       const std::vector<double>& b);
// Appends the input to the outputs as carried channels: result is (net(x), x).
ReluNetwork with_input_carry(const ReluNetwork& net);

nlohmann::json to_json(const ReluNetwork& net);
ReluNetwork network_from_json(const nlohmann::json& doc);
std::string serialize(const ReluNetwork& net);
ReluNetwork deserialize(const std::string& text);

}  // namespace kornet
