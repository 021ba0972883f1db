#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kornet/synthesis.hpp"

namespace kornet {

int derived_level(int N, int L) {
    if (N < 1 || L < 1) throw std::invalid_argument("budget: N and L must be >= 1");
    double v = 2.0 * std::log2(double(N) * L) + 1.0;
    return std::max(1, static_cast<int>(std::lround(v)));
}

SynthesisBudget SynthesisBudget::derived(int N, int L, int d) {
    SynthesisBudget b{N, L, derived_level(N, L), d, 2};
    b.validate();
    return b;
}

void SynthesisBudget::validate() const {
    if (N < 1 || L < 1 || n < 1 || d < 1 || s < 1) throw std::invalid_argument("budget: N, L, n, d, s must all be >= 1");
    if (n > 30) throw std::invalid_argument("budget: truncation level too large");
}

double SynthesisBudget::delta() const { return std::ldexp(1.0, -(n + 2)); }

TriflingRegion::TriflingRegion(int n_, int d_) : n(n_), d(d_), delta(std::ldexp(1.0, -(n_ + 2))) {
    if (n < 1 || d < 1) throw std::invalid_argument("trifling region: n and d must be >= 1");
}

namespace {

// x sits in the buffer [b - delta, b) before an interior boundary b of K equal cells
bool in_buffer(double x, int K, double delta) {
    if (K <= 1) return false;
    int cell = std::clamp(static_cast<int>(std::floor(x * K)), 0, K - 1);
    return cell < K - 1 && x >= double(cell + 1) / K - delta;
}

}  // namespace

bool TriflingRegion::contains(const Point& x) const {
    if (x.size() != static_cast<std::size_t>(d)) throw std::invalid_argument("trifling region: dimension mismatch");
    // the finest level has the most boundaries and every coarser boundary is among them
    int K = 1 << (n - 1);
    for (double v : x)
        if (in_buffer(v, K, delta)) return false;
    return true;
}

bool trifling_contains(const Point& x, const TriflingRegion& r) { return r.contains(x); }

bool level_region_contains(const LevelIndex& l, double delta, const Point& x) {
    if (x.size() != l.dim()) throw std::invalid_argument("level region: dimension mismatch");
    for (std::size_t r = 0; r < x.size(); ++r)
        if (in_buffer(x[r], 1 << (l.l[r] - 1), delta)) return false;
    return true;
}

double gm_reference(const Point& x, const std::vector<int>& m, int K) {
    if (x.size() != m.size()) throw std::invalid_argument("gm_reference: dimension mismatch");
    return partition_ref(m, K, x);
}

bool omega_m_contains(const Point& x, const std::vector<int>& m, int K) {
    if (x.size() != m.size()) throw std::invalid_argument("omega_m_contains: dimension mismatch");
    for (std::size_t j = 0; j < x.size(); ++j)
        if (!in_omega(m[j], K, x[j])) return false;
    return true;
}

std::vector<std::vector<int>> partition_labels(int d) {
    std::vector<std::vector<int>> out;
    for (int code = 0; code < (1 << d); ++code) {
        std::vector<int> m(d);
        for (int j = 0; j < d; ++j) m[j] = 1 + ((code >> j) & 1);
        out.push_back(std::move(m));
    }
    return out;
}

std::size_t PQFactor::cell_index(const Point& x) const {
    std::size_t idx = 0, stride = 1;
    for (std::size_t r = 0; r < cells.size(); ++r) {
        int c = std::clamp(static_cast<int>(std::floor(x[r] * cells[r])), 0, cells[r] - 1);
        idx += stride * c;
        stride *= cells[r];
    }
    return idx;
}

double PQFactor::p(const Point& x) const {
    double v = 1.0;
    for (std::size_t r = 0; r < cells.size(); ++r) v *= periodic_hat_train(level.l[r], x[r]);
    return v;
}

double PQFactor::q_at(const Point& x) const { return q[cell_index(x)]; }

PQFactor pq_decompose(const SurplusTable& t, const LevelIndex& l, double seminorm) {
    const auto& lv = t.levels();
    auto it = std::find(lv.begin(), lv.end(), l);
    if (it == lv.end()) throw std::invalid_argument("pq_decompose: level not present in table");
    PQFactor pq;
    pq.level = l;
    std::size_t total = 1;
    for (int lr : l.l) {
        pq.cells.push_back(1 << (lr - 1));
        total *= pq.cells.back();
    }
    const auto& vals = t.level_values(static_cast<std::size_t>(it - lv.begin()));
    pq.q.resize(total);
    PositionIndex i{std::vector<int>(l.dim())};
    double vmax = 0.0;
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rest = c;
        for (std::size_t r = 0; r < l.dim(); ++r) {
            i.i[r] = 2 * static_cast<int>(rest % pq.cells[r]) + 1;
            rest /= pq.cells[r];
        }
        pq.q[c] = vals[position_offset(l, i)];
        vmax = std::max(vmax, std::abs(pq.q[c]));
    }
    double bound = std::ldexp(seminorm, -static_cast<int>(l.dim()) - l.norm1());
    pq.C = std::max(bound, vmax);
    if (pq.C == 0.0) pq.C = 1.0;
    return pq;
}

double level_net_bound(const PQFactor& pq, const SynthesisBudget& b) {
    return (26.0 + 4.0 * pq.C) * std::pow(double(b.N), -4.0) * std::pow(double(b.L), -4.0);
}

}  // namespace kornet
