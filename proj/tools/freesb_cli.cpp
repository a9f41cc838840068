#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>

#include "CLI11.hpp"

#include "commands.hpp"
#include "freesb/rng.hpp"

using namespace freesb::cli;

namespace {

// Integer flags are read as decimal doubles and must be integral.
struct IntFlag {
    double raw;
    int* target;
    const char* name;
    CLI::Option* opt = nullptr;
};

int to_int(double x, const char* name) {
    if (!std::isfinite(x) || x != std::floor(x) || std::abs(x) > 1e9)
        throw UsageError(std::string(name) + " must be an integer");
    return static_cast<int>(x);
}

std::uint64_t parse_seed(const std::string& text, const char* where) {
    try {
        std::size_t used = 0;
        double x = std::stod(text, &used);
        if (used != text.size() || x < 0 || x != std::floor(x) || x > 9.007199254740992e15)
            throw std::invalid_argument(text);
        return static_cast<std::uint64_t>(x);
    } catch (const std::exception&) {
        throw UsageError(std::string(where) + ": seed must be a non-negative integer");
    }
}

void print_csv(const Outcome& out) {
    std::cout << "N,value,stderr\n";
    std::cout.precision(17);
    for (const auto& row : out.csv_rows) std::cout << static_cast<long>(row[0]) << ',' << row[1] << ',' << row[2] << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free unitary Segal-Bargmann toolkit"};
    app.require_subcommand(1);

    Options o;
    std::string seed_text = std::to_string(o.seed);
    bool csv = false;
    double threads = 0;
    std::vector<IntFlag> ints;

    app.add_option("--seed", seed_text, "RNG seed (FREESB_SEED overrides)");
    app.add_option("--threads", threads, "Monte Carlo worker threads (0 = all cores)");

    std::map<CLI::App*, std::function<Outcome(const Options&)>> handlers;
    auto sub = [&](const char* name, const char* help, auto fn) {
        CLI::App* s = app.add_subcommand(name, help);
        handlers[s] = fn;
        return s;
    };
    auto int_opt = [&](CLI::App* s, const char* flag, int* target) {
        ints.push_back({double(*target), target, flag});
        // Stable address: reserve below keeps the vector from reallocating.
        ints.back().opt = s->add_option(flag, ints.back().raw);
    };
    ints.reserve(64);
    auto t_opt = [&](CLI::App* s) {
        s->add_option("--t", o.t)->each([&](const std::string&) { o.t_given = true; });
    };

    auto* heat = sub("heat-apply", "exp((t/2) D) or exp((t/2) D_N) applied to a trace polynomial", heat_apply);
    heat->add_option("--gen", o.gen)->check(CLI::IsMember({"D", "DN"}));
    int_opt(heat, "--N", &o.N);
    t_opt(heat);
    heat->add_option("--tol", o.tol);
    heat->add_option("--f", o.f);

    auto* tr = sub("transform", "G_{s,t} or its inverse H_{s,t} on a Laurent polynomial", transform);
    tr->add_option("--direction", o.direction)->check(CLI::IsMember({"G", "H"}));
    tr->add_option("--s", o.s);
    t_opt(tr);
    tr->add_option("--f", o.f);

    auto* bi = sub("biane", "Image of u^k under the s,t transform", biane_cmd);
    int_opt(bi, "--k", &o.k);
    bi->add_option("--s", o.s);
    t_opt(bi);

    auto* mo = sub("moments", "nu_k, varrho_k, c_k, b_k", moments);
    int_opt(mo, "--k", &o.k);
    mo->add_option("--s", o.s);
    t_opt(mo);

    auto* gf = sub("gen-fn-check", "Check the generating function of the transform images", gen_fn_check);
    gf->add_option("--s", o.s);
    t_opt(gf);
    int_opt(gf, "--K", &o.K);
    gf->add_option("--tol", o.tol);

    auto* pde = sub("pde-check", "Check the moment PDEs on a t grid", pde_check);
    pde->add_option("--s", o.s);
    int_opt(pde, "--K", &o.K);
    pde->add_option("--t-grid", o.t_grid);
    pde->add_option("--tol", o.tol);

    auto* mg = sub("verify-magic", "Check the u_N basis contraction identities", verify_magic_cmd);
    int_opt(mg, "--N", &o.N);
    mg->add_option("--tol", o.tol);

    auto* it = sub("intertwine-check", "Compare the matrix Laplacian with D_N on random polynomials", intertwine_check);
    int_opt(it, "--N", &o.N);
    int_opt(it, "--degree", &o.degree);
    int_opt(it, "--trials", &o.trials);
    it->add_option("--tol", o.tol);

    auto* co = sub("concentration", "||P_N - [pi P]_N||^2 over a range of N", concentration);
    co->add_option("--p", o.p);
    co->add_option("--s", o.s);
    t_opt(co);
    co->add_option("--Ns", o.Ns);
    co->add_option("--mode", o.mode)->check(CLI::IsMember({"symbolic", "mc"}));
    int_opt(co, "--steps", &o.steps);
    co->add_option("--samples", o.samples);

    auto* m = sub("mc", "Monte Carlo expectation of a scalar trace polynomial", mc);
    m->add_option("--f", o.f);
    int_opt(m, "--N", &o.N);
    m->add_option("--s", o.s);
    t_opt(m);
    int_opt(m, "--steps", &o.steps);
    m->add_option("--samples", o.samples);
    m->add_flag("--check", o.check, "Exit 2 if the estimate misses the symbolic value");

    auto* nm = sub("norm", "L2 norm squared of a trace polynomial", norm);
    nm->add_option("--p", o.p);
    nm->add_option("--measure", o.measure)->check(CLI::IsMember({"rho", "mu"}));
    nm->add_option("--s", o.s);
    t_opt(nm);
    int_opt(nm, "--N", &o.N);

    for (auto& [s, fn] : handlers) {
        const bool tabular = s == co || s == m || s == nm;
        if (tabular) s->add_flag("--csv", csv, "CSV output (N, value, stderr)");
        s->add_option("--seed", seed_text);
        s->add_option("--threads", threads);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return Exit::usage;
    }

    try {
        for (auto& f : ints)
            if (f.opt->count() > 0) *f.target = to_int(f.raw, f.name);
        o.threads = to_int(threads, "--threads");
        if (o.threads < 0) throw UsageError("--threads must be >= 0");
        if (o.samples < 2) throw UsageError("--samples must be >= 2");
        o.seed = parse_seed(seed_text, "--seed");
        if (const char* env = std::getenv("FREESB_SEED")) o.seed = parse_seed(env, "FREESB_SEED");

        CLI::App* chosen = app.get_subcommands().front();
        const auto start = std::chrono::steady_clock::now();
        Outcome out = handlers.at(chosen)(o);
        const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

        if (csv) {
            print_csv(out);
        } else {
            json report = {{"schema", 1},
                           {"command", chosen->get_name()},
                           {"params", out.params},
                           {"results", out.results},
                           {"versions", {{"code", CODE_VERSION}, {"rng", freesb::RNG_NAME}}},
                           {"seed", o.seed},
                           {"wall_time_ms", ms}};
            std::cout << report.dump(2) << '\n';
        }
        return out.passed ? Exit::ok : Exit::verification_failed;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::verification_failed;
    }
}
