#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kornet/synthesis.hpp"

namespace kornet::cli {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_synthesis = 3, exit_verification = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Construction construction = Construction::continuous_rate;
    std::string target = "poly";
    bool normalize = true;
    int d = 1;
    std::vector<std::pair<int, int>> budgets;  // (N, L)
    std::vector<std::string> norms{"sup"};     // sup, l2, h1
    long samples = 4000;
    std::uint64_t seed = 1;
    std::string out;      // CSV path, stdout when empty
    std::string summary;  // JSON summary path, optional

    // throws ConfigError
    void validate() const;
    static ExperimentConfig from_json(const nlohmann::json& doc);
};

struct RateStudyResult {
    std::string csv;
    nlohmann::json summary;
};

// throws SynthesisError (or std::invalid_argument) when a budget cannot be built
RateStudyResult rate_study(const ExperimentConfig& cfg);

struct CheckResult {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
};

// suites: primitives, sparse_grid, synthesis, all; throws ConfigError on an unknown name
std::vector<CheckResult> run_verify(const std::string& suite, bool inject_fault);

// full command line without the program name
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kornet::cli
