#include "freesb/transform.hpp"

#include <algorithm>
#include <cmath>

namespace freesb {

TracePoly transform_G(const TracePoly& f, double s, double t, double tol) {
    return pi_eval(exp_apply(GeneratorSpec::D(), t / 2.0, f, tol), s - t);
}

TracePoly transform_H(const TracePoly& f, double s, double t, double tol) {
    return pi_eval(exp_apply(GeneratorSpec::D(), -t / 2.0, f, tol), s);
}

TracePoly biane(int k, double s, double t) { return transform_H(TracePoly::u(k), s, t); }

// ---------------------------------------------------------------- series

namespace {

bool is_scalar(const TracePoly& p) {
    return p.is_zero() || (p.size() == 1 && p.terms().begin()->first == TraceMono());
}

Coeff scalar_of(const TracePoly& p, const char* what) {
    if (!is_scalar(p)) throw SeriesError(std::string(what) + ": coefficient must be u-free");
    return p.coeff(TraceMono());
}

void same_order(const TPolySeries& a, const TPolySeries& b) {
    if (a.order() != b.order()) throw SeriesError("series orders differ");
}

}  // namespace

TPolySeries::TPolySeries(int K, std::vector<TracePoly> coeffs) : c_(std::move(coeffs)) {
    c_.resize(static_cast<std::size_t>(K) + 1);
}

TPolySeries TPolySeries::constant(int K, const TracePoly& c) {
    TPolySeries r(K);
    r[0] = c;
    return r;
}

TPolySeries TPolySeries::z(int K) {
    TPolySeries r(K);
    if (K >= 1) r[1] = TracePoly(1.0);
    return r;
}

TPolySeries TPolySeries::mobius(int K, Coeff a) {
    TPolySeries r(K);
    r[0] = TracePoly(a);
    for (int k = 1; k <= K; ++k) r[k] = TracePoly(2.0 * a);
    return r;
}

TPolySeries& TPolySeries::operator+=(const TPolySeries& o) {
    same_order(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
}

TPolySeries& TPolySeries::operator-=(const TPolySeries& o) {
    same_order(*this, o);
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
}

TPolySeries& TPolySeries::operator*=(Coeff a) {
    for (auto& x : c_) x *= a;
    return *this;
}

TPolySeries operator*(const TPolySeries& a, const TPolySeries& b) {
    same_order(a, b);
    const int K = a.order();
    TPolySeries r(K);
    for (int i = 0; i <= K; ++i) {
        if (a[i].is_zero()) continue;
        for (int j = 0; i + j <= K; ++j)
            if (!b[j].is_zero()) r[i + j] += a[i] * b[j];
    }
    return r;
}

double TPolySeries::max_abs() const {
    double m = 0.0;
    for (const auto& x : c_) m = std::max(m, x.max_abs());
    return m;
}

TPolySeries series_exp(const TPolySeries& f) {
    const int K = f.order();
    const Coeff f0 = scalar_of(f[0], "series_exp");
    TPolySeries e(K);
    e[0] = TracePoly(std::exp(f0));
    // k e_k = sum_{j=1}^k j f_j e_{k-j}
    for (int k = 1; k <= K; ++k) {
        TracePoly acc;
        for (int j = 1; j <= k; ++j)
            if (!f[j].is_zero()) acc += f[j] * e[k - j] * Coeff(double(j));
        e[k] = acc * Coeff(1.0 / k);
    }
    return e;
}

TPolySeries series_recip(const TPolySeries& f) {
    const int K = f.order();
    const Coeff f0 = scalar_of(f[0], "series_recip");
    if (std::abs(f0) == 0.0) throw SeriesError("series_recip: zero constant term");
    TPolySeries r(K);
    r[0] = TracePoly(1.0 / f0);
    for (int k = 1; k <= K; ++k) {
        TracePoly acc;
        for (int j = 1; j <= k; ++j)
            if (!f[j].is_zero()) acc += f[j] * r[k - j];
        r[k] = acc * (-1.0 / f0);
    }
    return r;
}

TPolySeries series_compose(const TPolySeries& f, const TPolySeries& g) {
    same_order(f, g);
    if (!g[0].is_zero()) throw SeriesError("series_compose: inner series needs a zero constant term");
    const int K = f.order();
    TPolySeries r = TPolySeries::constant(K, f[K]);
    for (int k = K - 1; k >= 0; --k) {
        r = r * g;
        r[0] += f[k];
    }
    return r;
}

TPolySeries series_revert(const TPolySeries& g) {
    const int K = g.order();
    if (!g[0].is_zero()) throw SeriesError("series_revert: needs a zero constant term");
    if (K < 1) throw SeriesError("series_revert: order must be >= 1");
    const Coeff g1 = scalar_of(g[1], "series_revert");
    if (std::abs(g1) == 0.0) throw SeriesError("series_revert: linear coefficient vanishes");
    // Each pass fixes at least one more order of h in g(h(z)) = z.
    TPolySeries h = TPolySeries::z(K) * (1.0 / g1);
    for (int pass = 1; pass < K; ++pass) {
        TPolySeries err = series_compose(g, h) - TPolySeries::z(K);
        h -= err * (1.0 / g1);
    }
    return h;
}

TPolySeries series_zdz(const TPolySeries& f) {
    TPolySeries r(f.order());
    for (int k = 1; k <= f.order(); ++k) r[k] = f[k] * Coeff(double(k));
    return r;
}

TPolySeries Pi_series(double s, double t, int K) {
    if (K < 1 || K > 16) throw std::invalid_argument("Pi_series: K must be in [1, 16]");
    TPolySeries r(K);
    for (int k = 1; k <= K; ++k) r[k] = biane(k, s, t);
    return r;
}

TPolySeries explicit_st_series(double t, int K) {
    TPolySeries inner = TPolySeries::z(K) * series_exp(TPolySeries::mobius(K, t / 2.0));
    for (int k = 0; k <= K; ++k) inner[k] = inner[k] * TracePoly::u(1);
    TPolySeries r = series_recip(TPolySeries::constant(K, TracePoly(1.0)) - inner);
    r[0] -= TracePoly(1.0);
    return r;
}

GenFnReport verify_gen_fn(double s, double t, int K, double tol) {
    const TPolySeries Pi = Pi_series(s, t, K);
    const TPolySeries zw = TPolySeries::z(K) * series_exp(TPolySeries::mobius(K, (s - t) / 2.0));
    const TPolySeries lhs = series_compose(Pi, zw);

    TPolySeries inner = TPolySeries::z(K) * series_exp(TPolySeries::mobius(K, s / 2.0));
    for (int k = 0; k <= K; ++k) inner[k] = inner[k] * TracePoly::u(1);
    TPolySeries rhs = series_recip(TPolySeries::constant(K, TracePoly(1.0)) - inner);
    rhs[0] -= TracePoly(1.0);

    GenFnReport rep;
    rep.residual_by_order.assign(static_cast<std::size_t>(K) + 1, 0.0);
    for (int k = 0; k <= K; ++k) {
        double r = (lhs[k] - rhs[k]).max_abs();
        rep.residual_by_order[static_cast<std::size_t>(k)] = r;
        rep.max_residual = std::max(rep.max_residual, r);
    }
    rep.ok = rep.max_residual < tol;
    return rep;
}

TPolySeries psi_series(double s, double t, int K) {
    auto c = c_table(K, s);
    TPolySeries r(K);
    for (int k = 1; k <= K; ++k) r[k] = TracePoly(c[k](t));
    return r;
}

TPolySeries phi_series(double s, double t, int K) {
    auto b = b_table(K, s);
    TPolySeries r(K);
    for (int k = 1; k <= K; ++k) r[k] = b[k](t);
    return r;
}

TPolySeries varrho_series(double s, int K) {
    TPolySeries r(K);
    for (int k = 1; k <= K; ++k) r[k] = TracePoly(Coeff(varrho(k, s)));
    return r;
}

double PdeReport::max() const {
    return std::max({psi_residual, phi_residual, varrho_residual, varrho_initial, phi_initial, implicit_psi});
}

PdeReport pde_residual(double s, const std::vector<double>& t_grid, int K) {
    PdeReport rep;
    const auto c = c_table(K, s);
    const auto b = b_table(K, s);
    std::vector<TPoly> rho(static_cast<std::size_t>(K) + 1);
    for (int k = 1; k <= K; ++k) rho[static_cast<std::size_t>(k)] = varrho_poly(k);

    for (double t : t_grid) {
        TPolySeries psi = psi_series(s, t, K), phi = phi_series(s, t, K);
        TPolySeries dpsi(K), dphi(K), rho_s(K), drho(K);
        for (int k = 1; k <= K; ++k) {
            dpsi[k] = TracePoly(c[k].derivative()(t));
            dphi[k] = b[k].derivative()(t);
            rho_s[k] = TracePoly(rho[k](t));
            drho[k] = TracePoly(rho[k].derivative()(t));
        }
        // d/dt psi = z psi d/dz psi ; d/dt phi = z psi d/dz phi ; d/ds rho = -z rho d/dz rho
        rep.psi_residual = std::max(rep.psi_residual, (dpsi - psi * series_zdz(psi)).max_abs());
        rep.phi_residual = std::max(rep.phi_residual, (dphi - psi * series_zdz(phi)).max_abs());
        rep.varrho_residual = std::max(rep.varrho_residual, (drho + rho_s * series_zdz(rho_s)).max_abs());
    }

    for (int k = 1; k <= K; ++k) {
        rep.varrho_initial = std::max(rep.varrho_initial, std::abs(rho[k](0.0) - 1.0));
        rep.phi_initial = std::max(rep.phi_initial, (b[k](0.0) - TracePoly::u(k)).max_abs());
    }

    // psi^s(0, w e^{(s/2)(1+w)/(1-w)}) = w / (1 - w)
    TPolySeries psi0 = psi_series(s, 0.0, K);
    TPolySeries zw = TPolySeries::z(K) * series_exp(TPolySeries::mobius(K, s / 2.0));
    TPolySeries lhs = series_compose(psi0, zw);
    TPolySeries geo(K);
    for (int k = 1; k <= K; ++k) geo[k] = TracePoly(1.0);
    rep.implicit_psi = (lhs - geo).max_abs();
    return rep;
}

}  // namespace freesb
