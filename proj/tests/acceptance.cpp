// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Each criterion also has a wall-clock budget that counts toward its verdict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "freesb/matrix_lab.hpp"
#include "freesb/moments.hpp"
#include "freesb/operators.hpp"
#include "freesb/rng.hpp"
#include "freesb/transform.hpp"
#include "freesb/word_poly.hpp"

using namespace freesb;

namespace {

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    // Records `value < bound` (strict) and appends it to the detail line.
    void below(const char* what, double value, double bound) {
        if (!(value < bound)) ok = false;
        detail << what << ' ' << value << " (< " << bound << ") ";
    }
    void within(const char* what, double value, double lo, double hi) {
        if (!(value >= lo && value <= hi)) ok = false;
        detail << what << ' ' << value << " in [" << lo << ", " << hi << "] ";
    }
    void require(const char* what, bool cond) {
        if (!cond) ok = false;
        detail << what << (cond ? " yes " : " NO ");
    }
};

int failures = 0;

void run(const char* id, const char* title, double budget_s, const std::function<void(Verdict&)>& body) {
    Verdict v;
    v.detail.precision(4);
    const auto start = std::chrono::steady_clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.ok = false;
        v.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_s;
    const bool pass = v.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s %s  %s: %s[%.2f s of %.0f s%s]\n", id, pass ? "PASS" : "FAIL", title, v.detail.str().c_str(), secs,
                budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

double max_abs(const CMatrix& M) { return M.cwiseAbs().maxCoeff(); }

double rel_err(Coeff got, Coeff want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

}  // namespace

int main() {
    run("AC-1", "magic formulas", 1.0, [](Verdict& v) {
        double worst = 0.0;
        for (int N : {2, 3, 5, 8}) worst = std::max(worst, verify_magic(N, 1e-11, 2024).max());
        v.below("max residual over N in {2,3,5,8}", worst, 1e-11);
    });

    run("AC-2", "Laplacian intertwines with D_N", 30.0, [](Verdict& v) {
        Philox rng(2, 0);
        double worst = 0.0;
        for (int N : {3, 6}) {
            for (int i = 0; i < 20; ++i) {
                TracePoly p = random_trace_poly(rng, 5, 6);
                CMatrix U = random_unitary(rng, N);
                worst = std::max(worst, max_abs(laplacian_eval(p, U, N) - evaluate(apply_DN(p, N), U)));
            }
        }
        v.below("max |Delta P_N - [D_N P]_N| over 40 cases", worst, 1e-8);
    });

    run("AC-3", "heat semigroup on u^2", 1.0, [](Verdict& v) {
        double worst = 0.0;
        for (auto [t, N] : {std::pair{0.7, 4}, {1.3, 9}}) {
            TracePoly got = exp_apply(GeneratorSpec::DN(N), t / 2, TracePoly::u(2));
            const Coeff a = got.coeff(TraceMono(2)), b = got.coeff(TraceMono(1, {{1, 1}}));
            worst = std::max(worst, rel_err(a, std::exp(-t) * std::cosh(t / N)));
            worst = std::max(worst, rel_err(b, -N * std::exp(-t) * std::sinh(t / N)));
            if (got.size() != 2) v.require("two-term result", false);
        }
        v.below("max relative coefficient error", worst, 1e-10);
    });

    run("AC-4", "partial product rule and [T, D] = [T, L] = 0", 5.0, [](Verdict& v) {
        Philox rng(4, 0);
        double prod = 0.0, comm = 0.0;
        for (int i = 0; i < 50; ++i) {
            TracePoly P = random_trace_poly(rng, 4, 6);
            TracePoly Q = random_trace_poly(rng, 3, 4, true);
            prod = std::max(prod, (apply_D(P * Q) - apply_D(P) * Q - P * apply_D(Q)).max_abs());
            const TracePoly L_P = apply_named(OpName::L, P);
            comm = std::max(comm, (tracing_map(apply_D(P)) - apply_D(tracing_map(P))).max_abs());
            comm = std::max(comm, (tracing_map(L_P) - apply_named(OpName::L, tracing_map(P))).max_abs());
        }
        v.below("product rule residual", prod, 1e-12);
        v.below("commutator residual", comm, 1e-12);
    });

    run("AC-5", "generating function of the Biane polynomials", 5.0, [](Verdict& v) {
        double worst = 0.0;
        for (auto [s, t] : {std::pair{1.0, 1.0}, {1.5, 0.8}, {0.9, 1.2}})
            worst = std::max(worst, verify_gen_fn(s, t, 8).max_residual);
        v.below("implicit identity residual, K = 8", worst, 1e-8);
        double explicit_gap = 0.0;
        for (double t : {0.5, 1.0, 1.5})
            explicit_gap = std::max(explicit_gap, (explicit_st_series(t, 8) - Pi_series(t, t, 8)).max_abs());
        v.below("s = t explicit expansion gap", explicit_gap, 1e-9);
    });

    run("AC-6", "moment recursions vs closed forms", 1.0, [](Verdict& v) {
        double c_err = 0.0;
        for (double s : {0.5, 1.0, 2.0}) {
            auto c = c_table(10, s);
            for (double t : {0.2, 0.9, 1.8})
                for (int k = 1; k <= 10; ++k)
                    c_err = std::max(c_err, rel_err(c[std::size_t(k)](t), std::exp(-k * t / 2) * nu(k, s - t)));
        }
        double r_err = 0.0;
        for (int k = 1; k <= 10; ++k)
            for (int i = -8; i <= 8; ++i) {
                const double t = i * 0.25;
                r_err = std::max(r_err, rel_err(varrho(k, t), std::exp(k * t / 2) * nu(k, t)));
            }
        v.below("c_k relative error", c_err, 1e-9);
        v.below("varrho_k relative error", r_err, 1e-9);
    });

    run("AC-7", "transform rate O(1/N^2)", 60.0, [](Verdict& v) {
        const double s = 1.5, t = 0.8;
        const TracePoly f = TracePoly::u(2);
        const TracePoly g = transform_G(f, s, t);
        const TracePoly h = transform_H(f, s, t);
        std::vector<double> xs, fwd, inv;
        for (int N : {4, 8, 16, 32}) {
            xs.push_back(N);
            fwd.push_back(l2_norm_sq(exp_apply(GeneratorSpec::DN(N), t / 2, f) - g, Measure::Mu(s, t, N)));
            inv.push_back(l2_norm_sq(exp_apply(GeneratorSpec::DN(N), -t / 2, f) - h, Measure::Rho(s, N)));
        }
        auto spread = [&](const std::vector<double>& y) {
            double lo = 1e300, hi = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                lo = std::min(lo, y[i] * xs[i] * xs[i]);
                hi = std::max(hi, y[i] * xs[i] * xs[i]);
            }
            return std::pair{lo, hi};
        };
        v.within("mu slope", loglog_slope(xs, fwd), -2.2, -1.8);
        auto [flo, fhi] = spread(fwd);
        v.detail << "N^2 value in [" << flo << ", " << fhi << "] ";
        v.require("bounded", fhi / flo < 2.0);
        v.within("rho slope", loglog_slope(xs, inv), -2.2, -1.8);
        auto [ilo, ihi] = spread(inv);
        v.detail << "N^2 value in [" << ilo << ", " << ihi << "] ";
        v.require("bounded", ihi / ilo < 2.0);
    });

    run("AC-8", "variance of tr U^k decays like 1/N^2", 60.0, [](Verdict& v) {
        const double s = 1.0;
        std::vector<double> xs{4, 8, 16, 32};
        for (int k = 1; k <= 3; ++k) {
            std::vector<double> var;
            for (double N : xs) {
                const TracePoly vk = TracePoly::v(k);
                const Coeff second = expectation(sesq_B(vk, vk), s, 0.0, int(N));
                const Coeff first = expectation(iota(vk), s, 0.0, int(N));
                var.push_back(second.real() - std::norm(first));
            }
            const std::string label = "k=" + std::to_string(k) + " slope";
            v.within(label.c_str(), loglog_slope(xs, var), -2.2, -1.8);
        }
    });

    run("AC-9", "G and H are mutually inverse", 5.0, [](Verdict& v) {
        const double s = 1.5, t = 0.8;
        double worst = 0.0;
        for (int k = -6; k <= 6; ++k) {
            const TracePoly uk = TracePoly::u(k);
            worst = std::max(worst, (transform_G(transform_H(uk, s, t), s, t) - uk).max_abs());
            worst = std::max(worst, (transform_H(transform_G(uk, s, t), s, t) - uk).max_abs());
        }
        v.below("max coefficient error", worst, 1e-9);
    });

    run("AC-10", "Monte Carlo agrees with the closed forms", 120.0, [](Verdict& v) {
        SamplerCfg cfg;
        cfg.N = 8;
        cfg.s = 1.0;
        cfg.steps = 200;
        McResult r = mc_expectation(TracePoly::v(1), cfg, 4000, false);
        const double gap_rho = std::abs(r.mean - std::exp(-0.5));
        v.detail << "E tr U " << r.mean.real() << " +- " << r.stderr_ << ' ';
        v.below("|gap|", gap_rho, 3 * r.stderr_ + 0.002);

        cfg.s = 1.5;
        cfg.t = 0.8;
        McResult m = mc_expectation(TracePoly::v(1), cfg, 4000, true);
        const double gap_mu = std::abs(m.mean - std::exp(-0.35));
        v.detail << "E tr Z " << m.mean.real() << " +- " << m.stderr_ << ' ';
        v.below("|gap|", gap_mu, 3 * m.stderr_ + 0.002);
    });

    run("AC-11", "Cayley-Hamilton degeneracy", 5.0, [](Verdict& v) {
        const TracePoly ch = parse_poly("u^2 - 2*u*v1 + 2*v1^2 - v2");
        v.below("zero test at N=2", zero_test(ch, 2, 20, 11).max_norm, 1e-12);
        double eq = 0.0;
        for (int N : {2, 4}) eq = std::max(eq, equivariance_check(ch, N, 11));
        v.below("equivariance residual", eq, 1e-10);
        const double low = zero_test(ch, 3, 20, 11).min_norm;
        v.detail << "smallest norm at N=3 " << low << ' ';
        v.require("nonzero at N=3", low > 0.1);
    });

    run("AC-12", "both routes to pi_s agree", 5.0, [](Verdict& v) {
        Philox rng(12, 0);
        double worst = 0.0;
        for (double s : {0.5, 2.0})
            for (int i = 0; i < 20; ++i) {
                TracePoly p = random_trace_poly(rng, 5, 6);
                worst = std::max(worst, (pi_eval(p, s) - pi_via_semigroup(p, s)).max_abs());
            }
        v.below("max coefficient gap", worst, 1e-10);
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
