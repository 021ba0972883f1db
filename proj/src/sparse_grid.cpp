#include "kornet/sparse_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kornet/relu_net.hpp"

namespace kornet {

LevelIndex::LevelIndex(std::vector<int> levels) : l(std::move(levels)) {
    for (int v : l)
        if (v < 1) throw std::invalid_argument("level entries must be >= 1");
}

int LevelIndex::norm1() const {
    int s = 0;
    for (int v : l) s += v;
    return s;
}

double LevelIndex::h(std::size_t j) const { return std::ldexp(1.0, -l.at(j)); }

bool valid_position(const LevelIndex& l, const PositionIndex& i) {
    if (i.i.size() != l.dim()) return false;
    for (std::size_t j = 0; j < l.dim(); ++j) {
        int v = i.i[j];
        if (v < 1 || v > (1 << l.l[j]) - 1 || v % 2 == 0) return false;
    }
    return true;
}

std::vector<LevelIndex> level_index_set(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("level_index_set: n and d must be positive");
    std::vector<LevelIndex> out;
    std::vector<int> cur(d, 1);
    int budget = n + d - 1;
    // odometer over l with the sum constraint, first coordinate slowest
    while (true) {
        out.emplace_back(cur);
        int j = d - 1;
        while (j >= 0) {
            ++cur[j];
            int sum = 0;
            for (int v : cur) sum += v;
            if (sum <= budget) break;
            cur[j] = 1;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

std::vector<PositionIndex> odd_index_set(const LevelIndex& l) {
    std::vector<PositionIndex> out;
    std::vector<int> cur(l.dim(), 1);
    while (true) {
        out.push_back({cur});
        int j = static_cast<int>(l.dim()) - 1;
        while (j >= 0) {
            cur[j] += 2;
            if (cur[j] < (1 << l.l[j])) break;
            cur[j] = 1;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

std::size_t position_offset(const LevelIndex& l, const PositionIndex& i) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < l.dim(); ++j) off = (off << (l.l[j] - 1)) + (i.i[j] - 1) / 2;
    return off;
}

std::uint64_t grid_point_count(int n, int d) {
    std::uint64_t c = 0;
    for (const auto& l : level_index_set(n, d)) c += std::uint64_t(1) << (l.norm1() - d);
    return c;
}

double hat1d(int level, int pos, double x) {
    // both branches are exact differences
    double X = std::ldexp(x, level);
    if (X <= pos - 1.0 || X >= pos + 1.0) return 0.0;
    return X < pos ? X - (pos - 1.0) : (pos + 1.0) - X;
}

double hat_basis_eval(const LevelIndex& l, const PositionIndex& i, const Point& x) {
    if (x.size() != l.dim() || i.i.size() != l.dim()) throw std::invalid_argument("hat_basis_eval: dimension mismatch");
    double v = 1.0;
    for (std::size_t j = 0; j < l.dim() && v != 0.0; ++j) v *= hat1d(l.l[j], i.i[j], x[j]);
    return v;
}

Point grid_point(const LevelIndex& l, const PositionIndex& i) {
    Point x(l.dim());
    for (std::size_t j = 0; j < l.dim(); ++j) x[j] = std::ldexp(double(i.i[j]), -l.l[j]);
    return x;
}

TargetFunction poly_bump(int d, bool normalize) {
    double scale = normalize ? std::pow(8.0, -d) : 1.0;
    TargetFunction f;
    f.name = "poly";
    f.d = d;
    f.eval = [scale](const Point& x) {
        double v = scale;
        for (double t : x) v *= 4.0 * t * (1.0 - t);
        return v;
    };
    f.grad = [scale](const Point& x) {
        Point g(x.size(), scale);
        for (std::size_t j = 0; j < x.size(); ++j)
            for (std::size_t k = 0; k < x.size(); ++k)
                g[j] *= j == k ? 4.0 - 8.0 * x[k] : 4.0 * x[k] * (1.0 - x[k]);
        return g;
    };
    f.seminorm = std::pow(8.0, d) * scale;
    f.w1inf_norm = 4.0 * scale;
    f.vanishes_on_boundary = true;
    return f;
}

TargetFunction sine_bump(int d, bool normalize) {
    constexpr double pi = std::numbers::pi;
    double scale = normalize ? std::pow(pi, -2.0 * d) : 1.0;
    TargetFunction f;
    f.name = "sine";
    f.d = d;
    f.eval = [scale](const Point& x) {
        double v = scale;
        for (double t : x) v *= std::sin(pi * t);
        return v;
    };
    f.grad = [scale](const Point& x) {
        Point g(x.size(), scale);
        for (std::size_t j = 0; j < x.size(); ++j)
            for (std::size_t k = 0; k < x.size(); ++k) g[j] *= j == k ? pi * std::cos(pi * x[k]) : std::sin(pi * x[k]);
        return g;
    };
    f.seminorm = std::pow(pi, 2.0 * d) * scale;
    f.w1inf_norm = pi * scale;
    f.vanishes_on_boundary = true;
    return f;
}

TargetFunction make_target(const std::string& name, int d, bool normalize) {
    if (d < 1) throw std::invalid_argument("target dimension must be positive");
    if (name == "poly") return poly_bump(d, normalize);
    if (name == "sine") return sine_bump(d, normalize);
    throw std::invalid_argument("unknown target function '" + name + "' (expected poly or sine)");
}

SurplusTable::SurplusTable(int n, int d) : n_(n), d_(d), levels_(level_index_set(n, d)) {
    for (std::size_t k = 0; k < levels_.size(); ++k) {
        values_.emplace_back(std::size_t(1) << (levels_[k].norm1() - d), 0.0);
        slot_[levels_[k].l] = k;
    }
}

long SurplusTable::level_slot(const LevelIndex& l) const {
    auto it = slot_.find(l.l);
    return it == slot_.end() ? -1 : static_cast<long>(it->second);
}

double SurplusTable::get(const LevelIndex& l, const PositionIndex& i) const {
    long k = level_slot(l);
    if (k < 0 || !valid_position(l, i)) return 0.0;
    return values_[k][position_offset(l, i)];
}

void SurplusTable::set(const LevelIndex& l, const PositionIndex& i, double v) {
    long k = level_slot(l);
    if (k < 0) throw std::invalid_argument("SurplusTable: level outside the truncated index set");
    if (!valid_position(l, i)) throw std::invalid_argument("SurplusTable: invalid position index");
    values_[k][position_offset(l, i)] = v;
}

std::size_t SurplusTable::size() const {
    std::size_t s = 0;
    for (const auto& v : values_) s += v.size();
    return s;
}

std::vector<SurplusTable::Entry> SurplusTable::entries() const {
    std::vector<Entry> out;
    for (std::size_t k = 0; k < levels_.size(); ++k) {
        auto pos = odd_index_set(levels_[k]);
        for (std::size_t q = 0; q < pos.size(); ++q) out.push_back({levels_[k], pos[q], values_[k][q]});
    }
    return out;
}

double surplus_bound(const LevelIndex& l, double seminorm) {
    return std::ldexp(seminorm, -static_cast<int>(l.dim()) - l.norm1());
}

namespace {

void check_boundary(const TargetFunction& f, int d) {
    if (!f.vanishes_on_boundary) throw std::invalid_argument("hierarchize: target must vanish on the boundary");
    // spot check a few boundary points
    for (int j = 0; j < d; ++j)
        for (double side : {0.0, 1.0})
            for (int k = 1; k < 8; ++k) {
                Point x(d, k / 8.0);
                x[j] = side;
                if (std::abs(f.eval(x)) > 1e-12) throw std::invalid_argument("hierarchize: target is nonzero on the boundary");
            }
}

}  // namespace

SurplusTable hierarchize(const TargetFunction& f, int n, int d) {
    if (f.d != d) throw std::invalid_argument("hierarchize: target dimension mismatch");
    check_boundary(f, d);
    SurplusTable t(n, d);
    std::size_t stencil = 1;
    for (int j = 0; j < d; ++j) stencil *= 3;
    for (std::size_t k = 0; k < t.levels().size(); ++k) {
        const LevelIndex& l = t.levels()[k];
        auto pos = odd_index_set(l);
        auto& vals = t.level_values(k);
        for (std::size_t q = 0; q < pos.size(); ++q) {
            Point c = grid_point(l, pos[q]);
            double v = 0.0;
            Point x(d);
            for (std::size_t s = 0; s < stencil; ++s) {
                std::size_t code = s;
                double w = 1.0;
                for (int j = 0; j < d; ++j) {
                    int shift = static_cast<int>(code % 3) - 1;
                    code /= 3;
                    x[j] = c[j] + shift * l.h(j);
                    if (shift != 0) w *= -0.5;
                }
                v += w * f.eval(x);
            }
            vals[q] = v;
        }
    }
    return t;
}

namespace {

// cell of level `lev` containing x, as (position index, hat value, hat slope)
struct Active {
    std::size_t cell;
    double phi, dphi;
};

Active active_hat(int lev, double x) {
    long cells = 1L << (lev - 1);
    long c = static_cast<long>(std::floor(std::ldexp(x, lev - 1)));
    if (c < 0) c = 0;
    if (c >= cells) c = cells - 1;
    double u = std::ldexp(x, lev) - double(2 * c + 1);
    double a = std::abs(u);
    Active r{static_cast<std::size_t>(c), hat1d(lev, static_cast<int>(2 * c + 1), x), 0.0};
    if (a < 1.0) r.dphi = (u > 0 ? -1.0 : 1.0) * std::ldexp(1.0, lev);
    return r;
}

}  // namespace

double interpolant_eval(const SurplusTable& t, const Point& x) {
    if (t.levels().empty()) return 0.0;
    if (static_cast<int>(x.size()) != t.d()) throw std::invalid_argument("interpolant_eval: dimension mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < t.levels().size(); ++k) {
        const auto& l = t.levels()[k].l;
        double phi = 1.0;
        std::size_t off = 0;
        for (std::size_t j = 0; j < l.size() && phi != 0.0; ++j) {
            Active a = active_hat(l[j], x[j]);
            phi *= a.phi;
            off = (off << (l[j] - 1)) + a.cell;
        }
        if (phi != 0.0) sum += t.level_values(k)[off] * phi;
    }
    return sum;
}

Point interpolant_grad(const SurplusTable& t, const Point& x) {
    Point g(x.size(), 0.0);
    if (t.levels().empty()) return g;
    if (static_cast<int>(x.size()) != t.d()) throw std::invalid_argument("interpolant_grad: dimension mismatch");
    std::vector<Active> act(x.size());
    for (std::size_t k = 0; k < t.levels().size(); ++k) {
        const auto& l = t.levels()[k].l;
        std::size_t off = 0;
        for (std::size_t j = 0; j < l.size(); ++j) {
            act[j] = active_hat(l[j], x[j]);
            off = (off << (l[j] - 1)) + act[j].cell;
        }
        double v = t.level_values(k)[off];
        if (v == 0.0) continue;
        for (std::size_t j = 0; j < l.size(); ++j) {
            double p = v * act[j].dphi;
            for (std::size_t q = 0; q < l.size() && p != 0.0; ++q)
                if (q != j) p *= act[q].phi;
            g[j] += p;
        }
    }
    return g;
}

nlohmann::json to_json(const SurplusTable& t) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : t.entries()) entries.push_back({{"l", e.l.l}, {"i", e.i.i}, {"v", e.v}});
    return {{"n", t.n()}, {"d", t.d()}, {"entries", entries}};
}

SurplusTable surplus_table_from_json(const nlohmann::json& doc) {
    try {
        int n = doc.at("n").get<int>(), d = doc.at("d").get<int>();
        SurplusTable t(n, d);
        const auto& arr = doc.at("entries");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            try {
                LevelIndex l(arr[k].at("l").get<std::vector<int>>());
                PositionIndex i{arr[k].at("i").get<std::vector<int>>()};
                t.set(l, i, arr[k].at("v").get<double>());
            } catch (const std::exception& e) {
                throw ParseError("surplus JSON at /entries/" + std::to_string(k) + ": " + e.what());
            }
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("surplus JSON: ") + e.what());
    }
}

}  // namespace kornet
