#include "kornet/relu_net.hpp"

#include <algorithm>
#include <sstream>

namespace kornet {

SparseMatrix SparseMatrix::from_entries(std::size_t r, std::size_t c, std::vector<Entry> entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    SparseMatrix m(r, c);
    std::size_t k = 0;
    for (std::size_t row = 0; row < r; ++row) {
        while (k < entries.size() && entries[k].r == row) {
            if (entries[k].c >= c) throw std::invalid_argument("sparse entry column out of range");
            double v = entries[k].v;
            std::size_t cc = entries[k].c;
            ++k;
            while (k < entries.size() && entries[k].r == row && entries[k].c == cc) v += entries[k++].v;
            if (v != 0.0) {
                m.col.push_back(static_cast<std::uint32_t>(cc));
                m.val.push_back(v);
            }
        }
        m.row_ptr[row + 1] = static_cast<std::uint32_t>(m.val.size());
    }
    if (k != entries.size()) throw std::invalid_argument("sparse entry row out of range");
    return m;
}

SparseMatrix SparseMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
    std::size_t r = dense.size();
    std::size_t c = r ? dense[0].size() : 0;
    std::vector<Entry> e;
    for (std::size_t i = 0; i < r; ++i) {
        if (dense[i].size() != c) throw std::invalid_argument("ragged weight matrix");
        for (std::size_t j = 0; j < c; ++j)
            if (dense[i][j] != 0.0) e.push_back({i, j, dense[i][j]});
    }
    return from_entries(r, c, std::move(e));
}

SparseMatrix SparseMatrix::identity(std::size_t n, double scale) {
    std::vector<Entry> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, i, scale});
    return from_entries(n, n, std::move(e));
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(rows, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < rows; ++r)
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d[r][col[k]] = val[k];
    return d;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == c) return val[k];
    return 0.0;
}

std::vector<SparseMatrix::Entry> SparseMatrix::entries() const {
    std::vector<Entry> e;
    e.reserve(val.size());
    for (std::size_t r = 0; r < rows; ++r)
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) e.push_back({r, col[k], val[k]});
    return e;
}

SparseMatrix matmul(const SparseMatrix& lhs, const SparseMatrix& rhs) {
    if (lhs.cols != rhs.rows) throw std::invalid_argument("matmul: shape mismatch");
    SparseMatrix out(lhs.rows, rhs.cols);
    std::vector<double> acc(rhs.cols, 0.0);
    std::vector<std::uint8_t> seen(rhs.cols, 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t r = 0; r < lhs.rows; ++r) {
        touched.clear();
        for (auto k = lhs.row_ptr[r]; k < lhs.row_ptr[r + 1]; ++k) {
            std::size_t mid = lhs.col[k];
            double a = lhs.val[k];
            for (auto q = rhs.row_ptr[mid]; q < rhs.row_ptr[mid + 1]; ++q) {
                auto c = rhs.col[q];
                if (!seen[c]) {
                    seen[c] = 1;
                    touched.push_back(c);
                    acc[c] = a * rhs.val[q];
                } else {
                    acc[c] += a * rhs.val[q];
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto c : touched) {
            if (acc[c] != 0.0) {
                out.col.push_back(c);
                out.val.push_back(acc[c]);
            }
            seen[c] = 0;
        }
        out.row_ptr[r + 1] = static_cast<std::uint32_t>(out.val.size());
    }
    return out;
}

ReluNetwork::ReluNetwork(std::size_t input_dim, std::vector<Layer> layers, std::string construction)
    : input_dim_(input_dim), layers_(std::move(layers)), construction_(std::move(construction)) {
    if (layers_.empty()) throw std::invalid_argument("network needs at least an output layer");
    std::size_t prev = input_dim_;
    for (const auto& l : layers_) {
        if (l.w.cols != prev) throw std::invalid_argument("incompatible layer shapes");
        if (l.b.size() != l.w.rows) throw std::invalid_argument("bias length does not match rows");
        prev = l.w.rows;
    }
}

std::size_t ReluNetwork::output_dim() const { return layers_.empty() ? 0 : layers_.back().w.rows; }

std::size_t ReluNetwork::width() const {
    std::size_t w = 0;
    for (std::size_t k = 0; k + 1 < layers_.size(); ++k) w = std::max(w, layers_[k].w.rows);
    return w;
}

std::uint64_t ReluNetwork::params() const {
    std::uint64_t p = 0;
    for (const auto& l : layers_) p += std::uint64_t(l.w.rows) * l.w.cols + l.w.rows;
    return p;
}

std::size_t ReluNetwork::nnz() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.w.nnz() + l.b.size();
    return n;
}

ReluNetwork ReluNetwork::renamed(std::string name) const {
    ReluNetwork r = *this;
    r.construction_ = std::move(name);
    return r;
}

namespace {

void affine(const Layer& l, const double* in, double* out) {
    const auto& w = l.w;
    for (std::size_t r = 0; r < w.rows; ++r) {
        // bias last, so weighted terms that cancel do so exactly
        double acc = 0.0;
        for (auto k = w.row_ptr[r]; k < w.row_ptr[r + 1]; ++k) acc += w.val[k] * in[w.col[k]];
        out[r] = acc + l.b[r];
    }
}

}  // namespace

EvalResult evaluate(const ReluNetwork& net, const std::vector<double>& x, bool record_pattern) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("forward: input dimension mismatch");
    EvalResult res;
    std::vector<double> cur = x, next;
    const auto& layers = net.layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
        next.assign(layers[k].w.rows, 0.0);
        affine(layers[k], cur.data(), next.data());
        if (k + 1 < layers.size()) {
            for (double& v : next) {
                if (record_pattern) res.pattern.push_back(v > 0.0 ? 1 : 0);
                v = v > 0.0 ? v : 0.0;
            }
        }
        cur.swap(next);
    }
    res.value = std::move(cur);
    return res;
}

std::vector<double> forward(const ReluNetwork& net, const std::vector<double>& x) {
    return evaluate(net, x, false).value;
}

std::vector<double> gradient(const ReluNetwork& net, const std::vector<double>& x) {
    if (net.output_dim() != 1) throw std::invalid_argument("gradient: network output is not scalar");
    if (x.size() != net.input_dim()) throw std::invalid_argument("gradient: input dimension mismatch");
    Evaluator ev(net);
    std::vector<double> g(net.input_dim());
    ev.value_and_gradient(x.data(), g.data());
    return g;
}

Evaluator::Evaluator(const ReluNetwork& net) : net_(&net) {
    if (net.output_dim() != 1) throw std::invalid_argument("Evaluator: network output is not scalar");
    const auto& layers = net.layers();
    acts_.resize(layers.size());
    std::size_t widest = net.input_dim();
    for (std::size_t k = 0; k < layers.size(); ++k) {
        acts_[k].resize(layers[k].w.rows);
        widest = std::max(widest, layers[k].w.rows);
    }
    g_.resize(widest);
    g_prev_.resize(widest);
}

double Evaluator::value(const double* x) {
    const auto& layers = net_->layers();
    const double* in = x;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        double* out = acts_[k].data();
        affine(layers[k], in, out);
        if (k + 1 < layers.size())
            for (std::size_t r = 0; r < layers[k].w.rows; ++r) out[r] = out[r] > 0.0 ? out[r] : 0.0;
        in = out;
    }
    return acts_.back()[0];
}

double Evaluator::value_and_gradient(const double* x, double* grad) {
    double v = value(x);
    const auto& layers = net_->layers();
    std::size_t n = layers.size();
    g_[0] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        const auto& w = layers[k].w;
        std::fill(g_prev_.begin(), g_prev_.begin() + w.cols, 0.0);
        for (std::size_t r = 0; r < w.rows; ++r) {
            double gr = g_[r];
            if (gr == 0.0) continue;
            for (auto q = w.row_ptr[r]; q < w.row_ptr[r + 1]; ++q) g_prev_[w.col[q]] += w.val[q] * gr;
        }
        if (k > 0) {
            const auto& a = acts_[k - 1];
            for (std::size_t c = 0; c < w.cols; ++c)
                if (!(a[c] > 0.0)) g_prev_[c] = 0.0;
        }
        std::swap(g_, g_prev_);
    }
    for (std::size_t j = 0; j < net_->input_dim(); ++j) grad[j] = g_[j];
    return v;
}

nlohmann::json to_json(const ReluNetwork& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers()) layers.push_back({{"w", l.w.to_dense()}, {"b", l.b}});
    return {{"input_dim", net.input_dim()},
            {"layers", layers},
            {"meta",
             {{"width", net.width()},
              {"depth", net.depth()},
              {"params", net.params()},
              {"construction", net.construction()}}}};
}

ReluNetwork network_from_json(const nlohmann::json& doc) {
    auto fail = [](const std::string& where, const std::string& what) -> ParseError {
        return ParseError("network JSON at " + where + ": " + what);
    };
    if (!doc.is_object()) throw fail("/", "expected an object");
    if (!doc.contains("input_dim") || !doc["input_dim"].is_number_unsigned())
        throw fail("/input_dim", "missing or not a non-negative integer");
    if (!doc.contains("layers") || !doc["layers"].is_array()) throw fail("/layers", "missing or not an array");
    std::size_t in = doc["input_dim"].get<std::size_t>();
    std::vector<Layer> layers;
    std::size_t prev = in;
    const auto& arr = doc["layers"];
    for (std::size_t k = 0; k < arr.size(); ++k) {
        std::string at = "/layers/" + std::to_string(k);
        const auto& l = arr[k];
        if (!l.is_object() || !l.contains("w") || !l.contains("b")) throw fail(at, "layer needs \"w\" and \"b\"");
        if (!l["w"].is_array() || !l["b"].is_array()) throw fail(at, "\"w\" and \"b\" must be arrays");
        std::vector<std::vector<double>> w;
        std::vector<double> b;
        try {
            w = l["w"].get<std::vector<std::vector<double>>>();
            b = l["b"].get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw fail(at, e.what());
        }
        for (std::size_t r = 0; r < w.size(); ++r)
            if (w[r].size() != prev) throw fail(at + "/w/" + std::to_string(r), "row length does not match previous layer");
        if (b.size() != w.size()) throw fail(at + "/b", "bias length does not match row count");
        SparseMatrix m = SparseMatrix::from_dense(w);
        m.cols = prev;
        if (w.empty()) m = SparseMatrix(0, prev);
        layers.push_back({std::move(m), std::move(b)});
        prev = layers.back().w.rows;
    }
    if (layers.empty()) throw fail("/layers", "no layers");
    std::string name;
    if (doc.contains("meta") && doc["meta"].contains("construction") && doc["meta"]["construction"].is_string())
        name = doc["meta"]["construction"].get<std::string>();
    return ReluNetwork(in, std::move(layers), name);
}

std::string serialize(const ReluNetwork& net) { return to_json(net).dump(); }

ReluNetwork deserialize(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("network JSON: ") + e.what());
    }
    return network_from_json(doc);
}

}  // namespace kornet
