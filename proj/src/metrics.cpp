#include "kornet/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kornet/rng.hpp"
#include "kornet/synthesis.hpp"

namespace kornet {

bool Domain::contains(const Point& x) const {
    switch (kind) {
        case Kind::full: return true;
        case Kind::trifling: return TriflingRegion(n, static_cast<int>(x.size())).contains(x);
        case Kind::omega_m: return omega_m_contains(x, m, K);
    }
    return false;
}

std::string Domain::name() const {
    switch (kind) {
        case Kind::full: return "full";
        case Kind::trifling: return "trifling";
        case Kind::omega_m: return "omega_m";
    }
    return "?";
}

nlohmann::json Domain::to_json() const {
    nlohmann::json j{{"kind", name()}};
    if (kind == Kind::trifling) j["n"] = n;
    if (kind == Kind::omega_m) {
        j["m"] = m;
        j["K"] = K;
    }
    return j;
}

std::string norm_name(Norm n) {
    switch (n) {
        case Norm::sup: return "sup";
        case Norm::lp: return "lp";
        case Norm::h1: return "h1";
    }
    return "?";
}

nlohmann::json ErrorReport::to_json() const {
    nlohmann::json j{{"norm", norm_name(norm)},
                     {"estimate", estimate},
                     {"std_error", std_error},
                     {"samples", samples},
                     {"seed", seed},
                     {"domain", domain.to_json()}};
    if (norm == Norm::lp) j["p"] = p;
    j["predicted_bound"] = predicted_bound ? nlohmann::json(*predicted_bound) : nlohmann::json(nullptr);
    return j;
}

std::string ErrorReport::json_line() const { return to_json().dump(); }

namespace {

double van_der_corput(std::uint64_t k) {
    double v = 0.0, scale = 0.5;
    for (; k; k >>= 1, scale *= 0.5)
        if (k & 1) v += scale;
    return v;
}

double wrap(double v) { return v - std::floor(v); }

}  // namespace

Point sample_point(int d, std::uint64_t seed, long k) {
    Point x(d);
    if (d == 1) {
        x[0] = wrap(van_der_corput(static_cast<std::uint64_t>(k)) + counter_uniform(seed, 0, 0) + kink_jitter);
        return x;
    }
    for (int j = 0; j < d; ++j)
        x[j] = wrap(counter_uniform(seed, static_cast<std::uint64_t>(j) + 1, static_cast<std::uint64_t>(k)) + kink_jitter);
    return x;
}

int dyadic_resolution(const Domain& domain, int d, long samples) {
    int r = domain.kind == Domain::Kind::trifling ? domain.n + 2 : 6;
    double cap = double(std::max<long>(samples, 4096));
    while (r > 0 && std::pow(std::ldexp(1.0, r) + 1.0, d) > cap) --r;
    return r;
}

ErrorReport sup_error(const TargetFunction& f, const ReluNetwork& net, const Domain& domain, long samples,
                      std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("sup_error: samples must be >= 1");
    const int d = static_cast<int>(net.input_dim());
    if (f.d != d) throw std::invalid_argument("sup_error: target and net dimensions differ");
    Evaluator ev(net);
    ErrorReport rep;
    rep.norm = Norm::sup;
    rep.seed = seed;
    rep.domain = domain;
    double worst = 0.0;
    long used = 0;
    auto visit = [&](const Point& x) {
        if (!domain.contains(x)) return;
        ++used;
        worst = std::max(worst, std::abs(ev.value(x.data()) - f.eval(x)));
    };
    for (long k = 0; k < samples; ++k) visit(sample_point(d, seed, k));
    const int r = dyadic_resolution(domain, d, samples);
    const long side = (1L << r) + 1;
    long total = 1;
    for (int j = 0; j < d; ++j) total *= side;
    Point x(d);
    for (long c = 0; c < total; ++c) {
        long rest = c;
        for (int j = 0; j < d; ++j) {
            x[j] = std::ldexp(double(rest % side), -r);
            rest /= side;
        }
        visit(x);
    }
    if (used == 0) throw std::runtime_error("sup_error: no sample point falls in the domain");
    rep.estimate = worst;
    rep.samples = used;
    return rep;
}

ErrorReport lp_error(const TargetFunction& f, const ReluNetwork& net, double p, long samples, std::uint64_t seed,
                     const Domain& domain) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_error: p must be >= 1");
    if (std::isinf(p)) return sup_error(f, net, domain, samples, seed);
    if (samples < 2) throw std::invalid_argument("lp_error: samples must be >= 2");
    const int d = static_cast<int>(net.input_dim());
    if (f.d != d) throw std::invalid_argument("lp_error: target and net dimensions differ");
    Evaluator ev(net);
    double sum = 0.0, sum2 = 0.0;
    long used = 0;
    for (long k = 0; k < samples; ++k) {
        Point x = sample_point(d, seed, k);
        if (!domain.contains(x)) continue;
        ++used;
        double v = std::pow(std::abs(ev.value(x.data()) - f.eval(x)), p);
        sum += v;
        sum2 += v * v;
    }
    if (used == 0) throw std::runtime_error("lp_error: no sample point falls in the domain");
    double S = double(samples);
    double mean = sum / S;
    double var = std::max(0.0, (sum2 / S - mean * mean) * S / (S - 1));
    double se_mean = std::sqrt(var / S);
    ErrorReport rep;
    rep.norm = Norm::lp;
    rep.p = p;
    rep.seed = seed;
    rep.domain = domain;
    rep.samples = used;
    rep.estimate = std::pow(mean, 1.0 / p);
    rep.std_error = mean > 0.0 ? std::pow(mean, 1.0 / p - 1.0) * se_mean / p : 0.0;
    return rep;
}

ErrorReport h1_error(const TargetFunction& f, const ReluNetwork& net, long samples, std::uint64_t seed) {
    if (!f.grad) throw std::invalid_argument("h1_error: target has no gradient");
    if (samples < 2) throw std::invalid_argument("h1_error: samples must be >= 2");
    const int d = static_cast<int>(net.input_dim());
    if (f.d != d || net.output_dim() != 1) throw std::invalid_argument("h1_error: net must map R^d to R for the target's d");
    Evaluator ev(net);
    Point g(d);
    double sum = 0.0, sum2 = 0.0;
    for (long k = 0; k < samples; ++k) {
        Point x = sample_point(d, seed, k);
        double e = ev.value_and_gradient(x.data(), g.data()) - f.eval(x);
        Point gf = f.grad(x);
        double v = e * e;
        for (int j = 0; j < d; ++j) v += (g[j] - gf[j]) * (g[j] - gf[j]);
        sum += v;
        sum2 += v * v;
    }
    double S = double(samples);
    double mean = sum / S;
    double var = std::max(0.0, (sum2 / S - mean * mean) * S / (S - 1));
    ErrorReport rep;
    rep.norm = Norm::h1;
    rep.seed = seed;
    rep.samples = samples;
    rep.estimate = std::sqrt(mean);
    rep.std_error = mean > 0.0 ? std::sqrt(var / S) / (2.0 * std::sqrt(mean)) : 0.0;
    return rep;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(points.size());
    for (auto [b, e] : points) {
        if (!(b > 0.0) || !(e > 0.0)) throw std::invalid_argument("rate_fit: budgets and errors must be positive");
        double x = std::log2(b), y = std::log2(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("rate_fit: budgets must not all be equal");
    RateFit fit;
    fit.points = points;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ybar = sy / n, ss_tot = 0, ss_res = 0;
    for (auto [b, e] : points) {
        double x = std::log2(b), y = std::log2(e);
        double r = y - (fit.intercept + fit.slope * x);
        ss_res += r * r;
        ss_tot += (y - ybar) * (y - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {

// long double forward pass; optionally keeps every hidden pre-activation
long double extended_pass(const ReluNetwork& net, const std::vector<long double>& x, std::vector<long double>* pre) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("forward_extended: input dimension mismatch");
    if (pre) pre->clear();
    std::vector<long double> in = x, out;
    const auto& layers = net.layers();
    for (std::size_t t = 0; t < layers.size(); ++t) {
        const auto& w = layers[t].w;
        bool hidden = t + 1 < layers.size();
        out.assign(w.rows, 0.0L);
        for (std::size_t r = 0; r < w.rows; ++r) {
            long double acc = 0.0L;
            for (std::uint32_t k = w.row_ptr[r]; k < w.row_ptr[r + 1]; ++k) acc += (long double)w.val[k] * in[w.col[k]];
            acc += layers[t].b[r];
            if (hidden && pre) pre->push_back(acc);
            out[r] = hidden ? std::max(acc, 0.0L) : acc;
        }
        in.swap(out);
    }
    return in.at(0);
}

}  // namespace

long double forward_extended(const ReluNetwork& net, const std::vector<long double>& x) {
    return extended_pass(net, x, nullptr);
}

double gradient_check(const ReluNetwork& net, const std::vector<Point>& points, double fd_step) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("gradient_check: step must be positive");
    double worst = 0.0;
    const std::size_t d = net.input_dim();
    for (const auto& x : points) {
        Point g = gradient(net, x);
        for (std::size_t j = 0; j < d; ++j) {
            std::vector<long double> a(x.begin(), x.end()), b(x.begin(), x.end());
            a[j] -= fd_step;
            b[j] += fd_step;
            long double fd = (forward_extended(net, b) - forward_extended(net, a)) / (b[j] - a[j]);
            worst = std::max(worst, double(std::abs((long double)g[j] - fd) / (1.0L + std::abs((long double)g[j]))));
        }
    }
    return worst;
}

namespace {

// Walks the segment x + t e_j, |t| <= r, one linear piece at a time (double is plenty here) and checks that the
// output slope never changes by more than 1e-8 relative. Unit switches whose effect cancels
// in the output pass, and so do the ~1e-9 ripples of deep product nets: a slope change that
// small cannot move a difference quotient past the 1e-6 gradient tolerance.
bool slice_affine(const ReluNetwork& net, const Point& x, std::size_t j, double r,
                  int max_pieces) {
    const auto& layers = net.layers();
    // a unit's state is read just ahead of t, so a switch exactly at t counts for the next piece;
    // the step must stay above the spacing of doubles near x or the walk stalls
    const double ahead = std::max(r * 1e-9, 8 * std::numeric_limits<double>::epsilon() * (1 + std::abs(x[j])));
    double t = -r, first_slope = 0;
    std::vector<double> in, tan, out, tout;
    for (int piece = 0; piece < max_pieces; ++piece) {
        in = x;
        in[j] += t;
        tan.assign(x.size(), 0.0);
        tan[j] = 1.0;
        double next = r;
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& w = layers[k].w;
            bool hidden = k + 1 < layers.size();
            out.assign(w.rows, 0.0);
            tout.assign(w.rows, 0.0);
            for (std::size_t row = 0; row < w.rows; ++row) {
                double v = 0.0, q = 0.0;
                for (std::uint32_t e = w.row_ptr[row]; e < w.row_ptr[row + 1]; ++e) {
                    v += w.val[e] * in[w.col[e]];
                    q += w.val[e] * tan[w.col[e]];
                }
                v += layers[k].b[row];
                if (hidden) {
                    if (q != 0.0) {
                        double cross = t - v / q;
                        if (cross > t + ahead) next = std::min(next, cross);
                    }
                    bool on = v + q * ahead > 0.0;
                    out[row] = on ? v : 0.0;
                    tout[row] = on ? q : 0.0;
                } else {
                    out[row] = v;
                    tout[row] = q;
                }
            }
            in.swap(out);
            tan.swap(tout);
        }
        double slope = tan.at(0);
        if (piece == 0)
            first_slope = slope;
        else if (std::abs(slope - first_slope) > 1e-8 * (1 + std::abs(first_slope)))
            return false;
        if (next >= r) return true;
        t = next;
    }
    return false;
}

}  // namespace

std::vector<Point> safe_points(const ReluNetwork& net, double lo, double hi, int count, std::uint64_t seed,
                               double radius, long max_candidates) {
    const int d = static_cast<int>(net.input_dim());
    if (max_candidates <= 0) max_candidates = 50L * count;
    std::vector<Point> out;
    for (long c = 0; c < max_candidates && static_cast<int>(out.size()) < count; ++c) {
        Point x(d);
        for (int j = 0; j < d; ++j) x[j] = lo + (hi - lo) * counter_uniform(seed, 100 + j, c);
        bool flat = true;
        for (int j = 0; j < d && flat; ++j) flat = slice_affine(net, x, j, radius, 64);
        if (flat) out.push_back(std::move(x));
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string rate_csv_header() { return "construction,d,N,L,NL,norm,error,predicted_bound,samples,seed"; }

std::string rate_csv_line(const RateRow& r) {
    std::string s = r.construction + "," + std::to_string(r.d) + "," + std::to_string(r.N) + "," + std::to_string(r.L) +
                    "," + std::to_string(long(r.N) * r.L) + "," + r.norm + "," + format_number(r.error) + ",";
    if (r.predicted_bound) s += format_number(*r.predicted_bound);
    s += "," + std::to_string(r.samples) + "," + std::to_string(r.seed);
    return s;
}

}  // namespace kornet
