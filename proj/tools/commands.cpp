#include "commands.hpp"

#include <cmath>
#include <sstream>

#include "freesb/matrix_lab.hpp"
#include "freesb/moments.hpp"
#include "freesb/operators.hpp"
#include "freesb/transform.hpp"
#include "freesb/word_poly.hpp"

namespace freesb::cli {

json to_json(Coeff c) { return json::array({c.real(), c.imag()}); }

json to_json(const TracePoly& p) {
    json terms = json::array();
    for (const auto& [m, c] : p.terms()) {
        json v = json::array();
        for (auto [j, e] : m.v) v.push_back({j, e});
        terms.push_back({{"u", m.u_exp}, {"v", v}, {"c", to_json(c)}});
    }
    return {{"text", format_poly(p)}, {"terms", terms}};
}

namespace {

TracePoly parse_flag(const std::string& text, const char* flag) {
    try {
        return parse_poly(text);
    } catch (const ParseError& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": bad list entry '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
    return out;
}

double tol_or(const Options& o, double dflt) { return o.tol > 0 ? o.tol : dflt; }

void require_transform_range(double s, double t) {
    if (!(s > t / 2.0 && t / 2.0 > 0.0)) throw UsageError("need s > t/2 > 0");
}

json tpoly_json(const TPoly& p) {
    json c = json::array();
    for (auto x : p.coeffs) c.push_back(to_json(x));
    return {{"prefactor_exp", p.prefactor_exp}, {"coeffs", c}};
}

}  // namespace

Outcome heat_apply(const Options& o) {
    Outcome out;
    TracePoly f = parse_flag(o.f, "--f");
    GeneratorSpec gen;
    if (o.gen == "D")
        gen = GeneratorSpec::D();
    else if (o.gen == "DN")
        gen = GeneratorSpec::DN(o.N);
    else
        throw UsageError("--gen must be D or DN");
    const double tol = tol_or(o, EXP_TOL);
    out.params = {{"gen", o.gen}, {"N", o.N}, {"t", o.t}, {"tol", tol}, {"f", format_poly(f)}};
    out.results = {{"theta", o.t / 2.0}, {"image", to_json(exp_apply(gen, o.t / 2.0, f, tol))}};
    return out;
}

Outcome transform(const Options& o) {
    Outcome out;
    TracePoly f = parse_flag(o.f, "--f");
    if (!f.is_laurent()) throw UsageError("--f must be a Laurent polynomial in u");
    if (o.direction != "G" && o.direction != "H") throw UsageError("--direction must be G or H");
    TracePoly img = o.direction == "G" ? transform_G(f, o.s, o.t) : transform_H(f, o.s, o.t);
    out.params = {{"direction", o.direction}, {"s", o.s}, {"t", o.t}, {"f", format_poly(f)}};
    out.results = {{"image", to_json(img)}};
    return out;
}

Outcome biane_cmd(const Options& o) {
    Outcome out;
    out.params = {{"k", o.k}, {"s", o.s}, {"t", o.t}};
    out.results = {{"p_k", to_json(biane(o.k, o.s, o.t))}};
    return out;
}

Outcome moments(const Options& o) {
    Outcome out;
    if (o.k < 1) throw UsageError("--k must be >= 1");
    out.params = {{"k", o.k}, {"s", o.s}};
    json r = {{"nu", to_json(nu(o.k, o.s))}, {"varrho", varrho(o.k, o.s)}};
    TPoly c = c_poly(o.k, o.s);
    r["c_k"] = tpoly_json(c);
    TLaurentPoly b = b_poly(o.k, o.s);
    json bc = json::array();
    for (const auto& x : b.coeffs) bc.push_back(to_json(x));
    r["b_k"] = {{"coeffs", bc}};
    if (o.t_given) {
        out.params["t"] = o.t;
        r["c_k_at_t"] = to_json(c(o.t));
        r["b_k_at_t"] = to_json(b(o.t));
    }
    out.results = r;
    return out;
}

Outcome gen_fn_check(const Options& o) {
    Outcome out;
    require_transform_range(o.s, o.t);
    if (o.K < 1 || o.K > 16) throw UsageError("--K must be in [1, 16]");
    const double tol = tol_or(o, 1e-8);
    GenFnReport rep = verify_gen_fn(o.s, o.t, o.K, tol);
    out.params = {{"s", o.s}, {"t", o.t}, {"K", o.K}, {"tol", tol}};
    out.results = {{"max_residual", rep.max_residual}, {"residual_by_order", rep.residual_by_order},
                   {"tol", tol}, {"pass", rep.ok}};
    out.passed = rep.ok;
    return out;
}

Outcome pde_check(const Options& o) {
    Outcome out;
    if (o.K < 1 || o.K > 24) throw UsageError("--K must be in [1, 24]");
    const double tol = tol_or(o, 1e-9);
    auto grid = parse_list(o.t_grid, "--t-grid");
    PdeReport rep = pde_residual(o.s, grid, o.K);
    out.params = {{"s", o.s}, {"K", o.K}, {"t_grid", grid}, {"tol", tol}};
    out.results = {{"psi_residual", rep.psi_residual},   {"phi_residual", rep.phi_residual},
                   {"varrho_residual", rep.varrho_residual}, {"varrho_initial", rep.varrho_initial},
                   {"phi_initial", rep.phi_initial},     {"implicit_psi", rep.implicit_psi},
                   {"max_residual", rep.max()},          {"tol", tol},
                   {"pass", rep.max() < tol}};
    out.passed = rep.max() < tol;
    return out;
}

Outcome verify_magic_cmd(const Options& o) {
    Outcome out;
    if (o.N < 1 || o.N > 128) throw UsageError("--N must be in [1, 128]");
    const double tol = tol_or(o, 1e-11);
    MagicReport r = verify_magic(o.N, tol, o.seed);
    out.params = {{"N", o.N}, {"tol", tol}};
    out.results = {{"sum_sq", r.sum_sq}, {"sandwich", r.sandwich}, {"projection", r.projection},
                   {"cross", r.cross},   {"max_residual", r.max()}, {"tol", tol},
                   {"pass", r.ok}};
    out.passed = r.ok;
    return out;
}

Outcome intertwine_check(const Options& o) {
    Outcome out;
    if (o.N < 1 || o.N > 32) throw UsageError("--N must be in [1, 32]");
    if (o.degree < 0 || o.degree > 8) throw UsageError("--degree must be in [0, 8]");
    const double tol = tol_or(o, 1e-8);
    Philox rng(o.seed, 0);
    double worst = 0.0;
    for (int i = 0; i < o.trials; ++i) {
        TracePoly p = random_trace_poly(rng, o.degree, 6);
        CMatrix U = random_unitary(rng, o.N);
        CMatrix lhs = laplacian_eval(p, U, o.N);
        CMatrix rhs = evaluate(apply_DN(p, o.N), U);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    out.params = {{"N", o.N}, {"degree", o.degree}, {"trials", o.trials}, {"tol", tol}};
    out.results = {{"max_residual", worst}, {"tol", tol}, {"pass", worst < tol}};
    out.passed = worst < tol;
    return out;
}

Outcome concentration(const Options& o) {
    Outcome out;
    TracePoly p = parse_flag(o.p, "--p");
    std::vector<int> Ns;
    for (double x : parse_list(o.Ns, "--Ns")) Ns.push_back(static_cast<int>(x));
    ConcMode mode;
    if (o.mode == "symbolic")
        mode = ConcMode::symbolic;
    else if (o.mode == "mc")
        mode = ConcMode::mc;
    else
        throw UsageError("--mode must be symbolic or mc");
    SamplerCfg cfg;
    cfg.steps = o.steps;
    cfg.seed = o.seed;
    ConcentrationTable tab;
    try {
        tab = concentration_experiment(p, o.s, o.t, Ns, mode, cfg, o.samples, o.threads);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    out.params = {{"p", format_poly(p)}, {"s", o.s}, {"t", o.t}, {"Ns", Ns}, {"mode", o.mode}};
    if (mode == ConcMode::mc) out.params.update({{"steps", o.steps}, {"samples", o.samples}});
    json rows = json::array();
    for (const auto& r : tab.rows) {
        rows.push_back({{"N", r.N}, {"value", r.value}, {"stderr", r.stderr_}});
        out.csv_rows.push_back({double(r.N), r.value, r.stderr_});
    }
    out.results = {{"rows", rows}, {"slope", std::isnan(tab.slope) ? json(nullptr) : json(tab.slope)}};
    return out;
}

Outcome mc(const Options& o) {
    Outcome out;
    TracePoly f = parse_flag(o.f, "--f");
    const bool mu = o.t_given && o.t != 0.0;
    SamplerCfg cfg;
    cfg.N = o.N;
    cfg.s = o.s;
    cfg.t = mu ? o.t : 0.0;
    cfg.steps = o.steps;
    cfg.seed = o.seed;
    McResult r;
    try {
        r = mc_expectation(f, cfg, o.samples, mu, o.threads);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    // tr of a trace polynomial is its image under the tracing map.
    Coeff exact = expectation(iota(tracing_map(f)), cfg.s, cfg.t, cfg.N);
    const double allowance = 3.0 * r.stderr_ + 0.002;
    const bool within = std::abs(r.mean - exact) <= allowance;
    out.params = {{"f", format_poly(f)}, {"N", o.N}, {"s", o.s}, {"t", cfg.t}, {"measure", mu ? "mu" : "rho"},
                  {"steps", o.steps}, {"samples", o.samples}};
    out.results = {{"mean", to_json(r.mean)}, {"stderr", r.stderr_}, {"symbolic", to_json(exact)},
                   {"allowance", allowance}, {"within_allowance", within}};
    out.csv_rows.push_back({double(o.N), r.mean.real(), r.stderr_});
    if (o.check) out.passed = within;
    return out;
}

Outcome norm(const Options& o) {
    Outcome out;
    TracePoly p = parse_flag(o.p, "--p");
    Measure m;
    if (o.measure == "rho")
        m = Measure::Rho(o.s, o.N);
    else if (o.measure == "mu")
        m = Measure::Mu(o.s, o.t, o.N);
    else
        throw UsageError("--measure must be rho or mu");
    if (o.N < 1) throw UsageError("--N must be >= 1");
    const double v = l2_norm_sq(p, m);
    out.params = {{"p", format_poly(p)}, {"measure", o.measure}, {"s", o.s}, {"N", o.N}};
    if (m.kind == Measure::mu) out.params["t"] = o.t;
    out.results = {{"norm_sq", v}, {"tol", EXP_TOL}};
    out.csv_rows.push_back({double(o.N), v, 0.0});
    return out;
}

}  // namespace freesb::cli
