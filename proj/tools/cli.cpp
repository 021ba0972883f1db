#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "kornet/metrics.hpp"
#include "kornet/rng.hpp"

namespace kornet::cli {

namespace {

const std::vector<std::string> known_norms{"sup", "l2", "h1"};

void check_target(const std::string& t) {
    if (t != "poly" && t != "sine") throw ConfigError("unknown target '" + t + "' (expected poly or sine)");
}

Construction parse_construction(const std::string& s) {
    try {
        return construction_from_name(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::pair<int, int> parse_budget(const std::string& s) {
    auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("missing x");
        std::size_t a = 0, b = 0;
        int N = std::stoi(s.substr(0, x), &a), L = std::stoi(s.substr(x + 1), &b);
        if (a != x || b != s.size() - x - 1) throw std::invalid_argument("trailing characters");
        return {N, L};
    } catch (const std::exception&) {
        throw ConfigError("budget '" + s + "' is not of the form NxL");
    }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Point parse_point(const std::string& s, std::size_t d) {
    Point x;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            x.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw ConfigError("bad coordinate '" + item + "'");
        }
    }
    if (x.size() != d) throw ConfigError("point '" + s + "' has " + std::to_string(x.size()) + " coordinates, net expects " + std::to_string(d));
    return x;
}

std::optional<double> bound_for(const SynthesizedApproximant& a, const std::string& norm) {
    const auto& b = a.predicted_bounds;
    for (const std::string& key : norm == "sup" ? std::vector<std::string>{"sup_trimmed", "l2"}
                                 : norm == "l2" ? std::vector<std::string>{"l2", "lp"}
                                                : std::vector<std::string>{"h1"}) {
        auto it = b.find(key);
        if (it != b.end()) return it->second;
    }
    return std::nullopt;
}

}  // namespace

void ExperimentConfig::validate() const {
    check_target(target);
    if (d < 1 || d > 6) throw ConfigError("d must lie in 1..6");
    if (budgets.empty()) throw ConfigError("at least one budget is required");
    for (auto [N, L] : budgets)
        if (N < 1 || L < 1) throw ConfigError("budget entries must be >= 1");
    if (norms.empty()) throw ConfigError("at least one norm is required");
    for (const auto& n : norms)
        if (std::find(known_norms.begin(), known_norms.end(), n) == known_norms.end())
            throw ConfigError("unknown norm '" + n + "' (expected sup, l2 or h1)");
    if (samples < 2) throw ConfigError("samples must be >= 2");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig c;
    try {
        if (doc.contains("construction")) c.construction = parse_construction(doc["construction"].get<std::string>());
        if (doc.contains("target")) c.target = doc["target"].get<std::string>();
        if (doc.contains("normalize")) c.normalize = doc["normalize"].get<bool>();
        if (doc.contains("d")) c.d = doc["d"].get<int>();
        if (doc.contains("budgets"))
            for (const auto& b : doc["budgets"]) c.budgets.push_back({b.at(0).get<int>(), b.at(1).get<int>()});
        if (doc.contains("norms")) c.norms = doc["norms"].get<std::vector<std::string>>();
        if (doc.contains("samples")) c.samples = doc["samples"].get<long>();
        if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("out")) c.out = doc["out"].get<std::string>();
        if (doc.contains("summary")) c.summary = doc["summary"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RateStudyResult rate_study(const ExperimentConfig& cfg) {
    cfg.validate();
    TargetFunction f = make_target(cfg.target, cfg.d, cfg.normalize);
    std::string csv = rate_csv_header() + "\n";
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    for (auto [N, L] : cfg.budgets) {
        SynthesizedApproximant a = synthesize(cfg.construction, f, N, L, cfg.d);
        for (const auto& norm : cfg.norms) {
            ErrorReport rep;
            if (norm == "sup") {
                Domain dom = cfg.construction == Construction::superconv_lp ? Domain::trifling(a.budget.n) : Domain::full();
                rep = sup_error(f, a.net, dom, cfg.samples, cfg.seed);
            } else if (norm == "l2") {
                rep = lp_error(f, a.net, 2.0, cfg.samples, cfg.seed);
            } else {
                rep = h1_error(f, a.net, cfg.samples, cfg.seed);
            }
            RateRow row{construction_name(cfg.construction), cfg.d, N, L, norm, rep.estimate, bound_for(a, norm),
                        rep.samples, cfg.seed};
            csv += rate_csv_line(row) + "\n";
            series[norm].push_back({double(N) * L, rep.estimate});
        }
    }
    nlohmann::json fits = nlohmann::json::object();
    for (const auto& norm : cfg.norms) {
        const auto& pts = series[norm];
        bool usable = pts.size() >= 3 && std::all_of(pts.begin(), pts.end(), [](auto p) { return p.second > 0.0; }) &&
                      std::any_of(pts.begin(), pts.end(), [&](auto p) { return p.first != pts[0].first; });
        if (!usable) {
            fits[norm] = nullptr;
            continue;
        }
        RateFit fit = rate_fit(pts);
        nlohmann::json jp = nlohmann::json::array();
        for (auto [b, e] : pts) jp.push_back({b, e});
        fits[norm] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}, {"points", jp}};
    }
    nlohmann::json summary{{"construction", construction_name(cfg.construction)},
                           {"target", cfg.target},
                           {"normalize", cfg.normalize},
                           {"d", cfg.d},
                           {"samples", cfg.samples},
                           {"seed", cfg.seed},
                           {"rng", rng_version},
                           {"fits", fits}};
    return {csv, summary};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Explicit ReLU networks for Korobov functions"};
    app.require_subcommand(1);

    std::string target = "poly", construction = "continuous_rate", norm = "sup", out_path, net_path, at, points_path,
                suite = "all", config_path, summary_path;
    bool normalize = false, inject = false;
    int d = 1, N = 2, L = 1, n = 3, trifling_n = 0;
    long samples = 4000;
    std::uint64_t seed = 1;
    std::vector<std::string> budgets, norms;

    auto common = [&](CLI::App* c) {
        c->add_option("--target", target, "poly or sine");
        c->add_flag("--normalize", normalize, "scale the target to unit mixed-derivative norm");
        c->add_option("--d", d, "dimension");
        c->add_option("--out", out_path, "output path (stdout when omitted)");
    };

    auto* dec = app.add_subcommand("decompose", "hierarchical surpluses of a target");
    common(dec);
    dec->add_option("--n", n, "truncation level");

    auto* syn = app.add_subcommand("synthesize", "build an approximant network");
    common(syn);
    syn->add_option("--construction", construction, "continuous_rate, superconv_lp or superconv_h1");
    syn->add_option("--N", N);
    syn->add_option("--L", L);

    auto* ev = app.add_subcommand("evaluate", "evaluate a stored network or measure its error");
    ev->add_option("--net", net_path, "network JSON")->required();
    ev->add_option("--at", at, "one point, comma separated");
    ev->add_option("--points", points_path, "file with one comma separated point per line");
    ev->add_option("--target", target);
    ev->add_flag("--normalize", normalize);
    ev->add_option("--norm", norm, "sup, l2 or h1");
    ev->add_option("--samples", samples);
    ev->add_option("--seed", seed);
    ev->add_option("--trifling-n", trifling_n, "restrict sup to the trimmed region of this level");
    ev->add_option("--out", out_path);

    auto* rs = app.add_subcommand("rate-study", "error versus budget sweep");
    common(rs);
    rs->add_option("--construction", construction);
    rs->add_option("--budget", budgets, "NxL, repeatable");
    rs->add_option("--norm", norms, "sup, l2 or h1, repeatable");
    rs->add_option("--samples", samples);
    rs->add_option("--seed", seed);
    rs->add_option("--summary", summary_path, "JSON summary path");
    rs->add_option("--config", config_path, "JSON sweep config; flags given as well are ignored");

    auto* ver = app.add_subcommand("verify", "run the invariant suites");
    ver->add_option("--suite", suite, "primitives, sparse_grid, synthesis or all");
    ver->add_flag("--inject-fault", inject, "perturb a hat weight to show the suite catches it");
    ver->add_option("--out", out_path, "JSON report path");

    std::vector<const char*> argv{"kornet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }

    try {
        if (dec->parsed()) {
            check_target(target);
            if (d < 1 || n < 1) throw ConfigError("d and n must be >= 1");
            TargetFunction f = make_target(target, d, normalize);
            nlohmann::json doc = to_json(hierarchize(f, n, d));
            doc["target"] = {{"name", target}, {"normalize", normalize}};
            write_text(out_path, doc.dump() + "\n", out);
            return exit_ok;
        }
        if (syn->parsed()) {
            check_target(target);
            Construction c = parse_construction(construction);
            if (d < 1 || N < 1 || L < 1) throw ConfigError("d, N, L must be >= 1");
            TargetFunction f = make_target(target, d, normalize);
            SynthesizedApproximant a;
            try {
                a = synthesize(c, f, N, L, d);
            } catch (const std::exception& e) {
                err << "synthesis failed: " << e.what() << "\n";
                return exit_synthesis;
            }
            nlohmann::json side = sidecar_json(a);
            nlohmann::json doc = to_json(a.net);
            doc["meta"]["budget"] = side["budget"];
            doc["meta"]["predicted_bounds"] = side["predicted_bounds"];
            doc["meta"]["target"] = {{"name", target}, {"normalize", normalize}};
            write_text(out_path, doc.dump() + "\n", out);
            if (!out_path.empty()) write_text(out_path + ".meta.json", side.dump() + "\n", out);
            for (const auto& w : a.warnings) err << "warning: " << w << "\n";
            return exit_ok;
        }
        if (ev->parsed()) {
            ReluNetwork net;
            try {
                net = deserialize(read_text(net_path));
            } catch (const ParseError& e) {
                throw ConfigError(e.what());
            }
            std::string text;
            if (!at.empty()) {
                text = format_number(forward(net, parse_point(at, net.input_dim()))[0]) + "\n";
            } else if (!points_path.empty()) {
                std::stringstream ss(read_text(points_path));
                std::string line;
                while (std::getline(ss, line))
                    if (line.find_first_not_of(" \t\r") != std::string::npos)
                        text += format_number(forward(net, parse_point(line, net.input_dim()))[0]) + "\n";
            } else {
                check_target(target);
                int dim = static_cast<int>(net.input_dim());
                TargetFunction f = make_target(target, dim, normalize);
                ErrorReport rep;
                if (norm == "sup")
                    rep = sup_error(f, net, trifling_n > 0 ? Domain::trifling(trifling_n) : Domain::full(), samples, seed);
                else if (norm == "l2")
                    rep = lp_error(f, net, 2.0, samples, seed);
                else if (norm == "h1")
                    rep = h1_error(f, net, samples, seed);
                else
                    throw ConfigError("unknown norm '" + norm + "'");
                nlohmann::json j = rep.to_json();
                j["rng"] = rng_version;
                text = j.dump() + "\n";
            }
            write_text(out_path, text, out);
            return exit_ok;
        }
        if (rs->parsed()) {
            ExperimentConfig cfg;
            if (!config_path.empty()) {
                nlohmann::json doc;
                try {
                    doc = nlohmann::json::parse(read_text(config_path));
                } catch (const nlohmann::json::exception& e) {
                    throw ConfigError(std::string("config: ") + e.what());
                }
                cfg = ExperimentConfig::from_json(doc);
            } else {
                cfg.construction = parse_construction(construction);
                cfg.target = target;
                cfg.normalize = normalize;
                cfg.d = d;
                for (const auto& b : budgets) cfg.budgets.push_back(parse_budget(b));
                if (!norms.empty()) cfg.norms = norms;
                cfg.samples = samples;
                cfg.seed = seed;
                cfg.out = out_path;
                cfg.summary = summary_path;
            }
            cfg.validate();
            RateStudyResult r;
            try {
                r = rate_study(cfg);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                err << "synthesis failed: " << e.what() << "\n";
                return exit_synthesis;
            }
            write_text(cfg.out, r.csv, out);
            if (!cfg.summary.empty()) write_text(cfg.summary, r.summary.dump(2) + "\n", out);
            return exit_ok;
        }
        if (ver->parsed()) {
            auto results = run_verify(suite, inject);
            bool all = true;
            nlohmann::json rep = nlohmann::json::array();
            for (const auto& c : results) {
                all = all && c.pass;
                out << (c.pass ? "PASS " : "FAIL ") << c.suite << "/" << c.name;
                if (!c.detail.empty()) out << "  (" << c.detail << ")";
                out << "\n";
                rep.push_back({{"suite", c.suite}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            }
            if (!out_path.empty()) write_text(out_path, nlohmann::json{{"passed", all}, {"checks", rep}}.dump(2) + "\n", out);
            return all ? exit_ok : exit_verification;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }
    return exit_config;
}

}  // namespace kornet::cli
