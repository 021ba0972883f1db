#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace kornet {

using Point = std::vector<double>;

struct LevelIndex {
    std::vector<int> l;

    explicit LevelIndex(std::vector<int> levels);
    std::size_t dim() const { return l.size(); }
    int norm1() const;
    // mesh width 2^-l_j
    double h(std::size_t j) const;
    bool operator==(const LevelIndex& o) const { return l == o.l; }
    bool operator<(const LevelIndex& o) const { return l < o.l; }
};

struct PositionIndex {
    std::vector<int> i;
    bool operator==(const PositionIndex& o) const { return i == o.i; }
};

bool valid_position(const LevelIndex& l, const PositionIndex& i);

// All l with every entry >= 1 and |l|_1 <= n+d-1, lexicographic.
std::vector<LevelIndex> level_index_set(int n, int d);
std::vector<PositionIndex> odd_index_set(const LevelIndex& l);
// Number of grid points of the truncated sparse grid.
std::uint64_t grid_point_count(int n, int d);

double hat1d(int level, int pos, double x);
double hat_basis_eval(const LevelIndex& l, const PositionIndex& i, const Point& x);
Point grid_point(const LevelIndex& l, const PositionIndex& i);

struct TargetFunction {
    std::string name;
    int d = 1;
    std::function<double(const Point&)> eval;
    std::function<Point(const Point&)> grad;
    double seminorm = 0.0;    // sup of the mixed derivative D^(2,...,2) f
    double w1inf_norm = 0.0;  // max(sup|f|, sup|grad f|_inf)
    bool vanishes_on_boundary = false;
};

// prod_j 4 x_j (1 - x_j); divided by 8^d when normalized
TargetFunction poly_bump(int d, bool normalize);
// prod_j sin(pi x_j); divided by pi^(2d) when normalized
TargetFunction sine_bump(int d, bool normalize);
TargetFunction make_target(const std::string& name, int d, bool normalize);

class SurplusTable {
public:
    SurplusTable() = default;
    SurplusTable(int n, int d);

    int n() const { return n_; }
    int d() const { return d_; }
    const std::vector<LevelIndex>& levels() const { return levels_; }
    // surpluses of one level in odd_index_set order
    const std::vector<double>& level_values(std::size_t k) const { return values_[k]; }
    std::vector<double>& level_values(std::size_t k) { return values_[k]; }

    // 0 when (l, i) is not stored
    double get(const LevelIndex& l, const PositionIndex& i) const;
    void set(const LevelIndex& l, const PositionIndex& i, double v);
    std::size_t size() const;

    struct Entry {
        LevelIndex l;
        PositionIndex i;
        double v;
    };
    std::vector<Entry> entries() const;

private:
    long level_slot(const LevelIndex& l) const;

    int n_ = 0, d_ = 0;
    std::vector<LevelIndex> levels_;
    std::vector<std::vector<double>> values_;
    std::map<std::vector<int>, std::size_t> slot_;
};

// offset of i inside odd_index_set(l)
std::size_t position_offset(const LevelIndex& l, const PositionIndex& i);

double surplus_bound(const LevelIndex& l, double seminorm);
SurplusTable hierarchize(const TargetFunction& f, int n, int d);
double interpolant_eval(const SurplusTable& t, const Point& x);
Point interpolant_grad(const SurplusTable& t, const Point& x);

nlohmann::json to_json(const SurplusTable& t);
SurplusTable surplus_table_from_json(const nlohmann::json& doc);

}  // namespace kornet
