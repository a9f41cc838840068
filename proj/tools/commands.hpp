#ifndef FREESB_TOOLS_COMMANDS_HPP
#define FREESB_TOOLS_COMMANDS_HPP

#include <string>
#include <vector>

#include "json.hpp"

#include "freesb/trace_poly.hpp"

namespace freesb::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* CODE_VERSION = "0.1.0";

enum Exit { ok = 0, usage = 1, verification_failed = 2 };

// Thrown for bad flag values that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outcome {
    json params = json::object();
    json results = json::object();
    bool passed = true;
    // Rows for --csv: N, value, stderr.
    std::vector<std::vector<double>> csv_rows;
};

json to_json(Coeff c);
json to_json(const TracePoly& p);

struct Options {
    // heat-apply / transform / norm / mc / concentration
    std::string gen = "DN";
    std::string f = "u^2";
    std::string p = "v1";
    std::string direction = "G";
    std::string measure = "rho";
    std::string mode = "symbolic";
    std::string Ns = "4,8,16,32";
    std::string t_grid = "0.3,0.7";
    int N = 4;
    int k = 1;
    int K = 8;
    int degree = 5;
    int trials = 20;
    int steps = 200;
    long samples = 4000;
    int threads = 0;
    double s = 1.0;
    double t = 0.0;
    double tol = -1.0;  // negative: command default
    bool t_given = false;
    bool check = false;
    std::uint64_t seed = 20240607;
};

Outcome heat_apply(const Options& o);
Outcome transform(const Options& o);
Outcome biane_cmd(const Options& o);
Outcome moments(const Options& o);
Outcome gen_fn_check(const Options& o);
Outcome pde_check(const Options& o);
Outcome verify_magic_cmd(const Options& o);
Outcome intertwine_check(const Options& o);
Outcome concentration(const Options& o);
Outcome mc(const Options& o);
Outcome norm(const Options& o);

}  // namespace freesb::cli

#endif
