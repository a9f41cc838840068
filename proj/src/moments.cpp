#include "freesb/moments.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace freesb {

Coeff TPoly::operator()(double t) const {
    Coeff acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
    return std::exp(prefactor_exp) * acc;
}

TPoly TPoly::derivative() const {
    TPoly r{{}, prefactor_exp};
    for (std::size_t i = 1; i < coeffs.size(); ++i) r.coeffs.push_back(coeffs[i] * double(i));
    if (r.coeffs.empty()) r.coeffs.push_back(0.0);
    return r;
}

TPoly TPoly::integral() const {
    TPoly r{{0.0}, prefactor_exp};
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs.push_back(coeffs[i] / double(i + 1));
    return r;
}

TPoly& TPoly::operator+=(const TPoly& o) {
    if (coeffs.empty()) return *this = o;
    const double rescale = std::exp(o.prefactor_exp - prefactor_exp);
    if (coeffs.size() < o.coeffs.size()) coeffs.resize(o.coeffs.size(), 0.0);
    for (std::size_t i = 0; i < o.coeffs.size(); ++i) coeffs[i] += o.coeffs[i] * rescale;
    return *this;
}

TPoly& TPoly::operator*=(Coeff c) {
    for (auto& x : coeffs) x *= c;
    return *this;
}

TPoly operator*(const TPoly& a, const TPoly& b) {
    TPoly r{std::vector<Coeff>(a.coeffs.size() + b.coeffs.size() - 1, 0.0), a.prefactor_exp + b.prefactor_exp};
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    return r;
}

TracePoly TLaurentPoly::operator()(double t) const {
    TracePoly acc;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * Coeff(t) + *it;
    return acc;
}

TLaurentPoly TLaurentPoly::derivative() const {
    TLaurentPoly r;
    for (std::size_t i = 1; i < coeffs.size(); ++i) r.coeffs.push_back(coeffs[i] * Coeff(double(i)));
    if (r.coeffs.empty()) r.coeffs.emplace_back();
    return r;
}

TLaurentPoly TLaurentPoly::integral() const {
    TLaurentPoly r;
    r.coeffs.emplace_back();
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs.push_back(coeffs[i] * Coeff(1.0 / double(i + 1)));
    return r;
}

TLaurentPoly& TLaurentPoly::operator+=(const TLaurentPoly& o) {
    if (coeffs.size() < o.coeffs.size()) coeffs.resize(o.coeffs.size());
    for (std::size_t i = 0; i < o.coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
}

TLaurentPoly operator*(const TPoly& a, const TLaurentPoly& b) {
    TLaurentPoly r;
    r.coeffs.resize(a.coeffs.size() + b.coeffs.size() - 1);
    const double pre = std::exp(a.prefactor_exp);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) r.coeffs[i + j] += b.coeffs[j] * (pre * a.coeffs[i]);
    return r;
}

std::uint64_t catalan(int k) {
    if (k < 0 || k > 33) throw std::overflow_error("catalan: k outside [0, 33]");
    unsigned __int128 c = 1;
    for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
    return static_cast<std::uint64_t>(c);
}

namespace {

// e^{|k|s/2} nu_k(s): the polynomial part, summed with Neumaier compensation
// because the terms alternate in sign.
double nu_poly_part(int k, double s) {
    const int a = std::abs(k);
    if (a == 0) return 1.0;
    if (a > 64) throw std::invalid_argument("nu: |k| > 64 not supported");
    long double sum = 0.0L, comp = 0.0L;
    long double power = 1.0L / a;  // (-s)^j / j! * a^(j-1), starting at j = 0
    long double binom = a;         // binom(a, j+1)
    for (int j = 0; j < a; ++j) {
        long double term = power * binom;
        long double t = sum + term;
        if (std::fabs(sum) >= std::fabs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
        power *= -static_cast<long double>(s) * a / (j + 1);
        binom = binom * (a - j - 1) / (j + 2);
    }
    return static_cast<double>(sum + comp);
}

}  // namespace

Coeff nu(int k, double s) {
    if (k == 0) return 1.0;
    return std::exp(-std::abs(k) * s / 2.0) * nu_poly_part(k, s);
}

TracePoly pi_eval(const TracePoly& p, double s) {
    std::map<int, Coeff> assign;
    for (const auto& [m, c] : p.terms())
        for (auto [j, e] : m.v) assign.try_emplace(j, nu(j, s));
    return substitute_v(p, assign);
}

TracePoly pi_via_semigroup(const TracePoly& p, double s, double tol) {
    TracePoly q = exp_apply(GeneratorSpec::pi_gen(), -s / 2.0, p, tol);
    std::map<int, Coeff> ones;
    for (const auto& [m, c] : q.terms())
        for (auto [j, e] : m.v) ones.try_emplace(j, 1.0);
    return substitute_v(q, ones);
}

std::vector<TPoly> c_table(int K, double s) {
    std::vector<TPoly> c(static_cast<std::size_t>(K) + 1);
    for (int k = 1; k <= K; ++k) {
        TPoly ck = TPoly::constant(nu_poly_part(k, s), -k * s / 2.0);
        for (int m = 1; m < k; ++m) {
            TPoly term = (c[k - m] * c[m]).integral();
            term *= double(m);
            ck += term;
        }
        c[k] = ck;
    }
    return c;
}

std::vector<TLaurentPoly> b_table(int K, double s) {
    auto c = c_table(K, s);
    std::vector<TLaurentPoly> b(static_cast<std::size_t>(K) + 1);
    for (int k = 1; k <= K; ++k) {
        TLaurentPoly bk{{TracePoly::u(k)}};
        for (int m = 1; m < k; ++m) {
            TLaurentPoly term = (c[k - m] * b[m]).integral();
            for (auto& x : term.coeffs) x *= Coeff(double(m));
            bk += term;
        }
        b[k] = bk;
    }
    return b;
}

TPoly c_poly(int k, double s) {
    if (k < 1) throw std::invalid_argument("c_poly: k must be >= 1");
    return c_table(k, s)[k];
}

TLaurentPoly b_poly(int k, double s) {
    if (k < 1) throw std::invalid_argument("b_poly: k must be >= 1");
    return b_table(k, s)[k];
}

TPoly varrho_poly(int k) {
    if (k < 1) throw std::invalid_argument("varrho: k must be >= 1");
    std::vector<TPoly> r(static_cast<std::size_t>(k) + 1);
    for (int n = 1; n <= k; ++n) {
        TPoly rn = TPoly::constant(1.0);
        TPoly acc;
        for (int m = 1; m < n; ++m) acc += r[m] * r[n - m];
        if (!acc.coeffs.empty()) {
            TPoly integ = acc.integral();
            integ *= -double(n) / 2.0;
            rn += integ;
        }
        r[n] = rn;
    }
    return r[k];
}

double varrho(int k, double t) { return varrho_poly(k)(t).real(); }

double nu_bound(int k, double t) {
    const int a = std::abs(k);
    if (a == 0) return 1.0;
    return double(catalan(a - 1)) * std::pow(1.0 + std::abs(t), a - 1) * std::exp(-a * t / 2.0);
}

double c_bound(int k, double s, double t) {
    return double(catalan(k - 1)) * std::pow(1.0 + std::abs(s - t), k - 1) * std::exp(-k * s / 2.0);
}

double b_bound(int k, double s, double t, Coeff u) {
    return std::pow(5.0 * (1.0 + std::abs(s)) * (1.0 + std::abs(t)), k - 1) * std::pow(std::abs(u), k);
}

}  // namespace freesb
