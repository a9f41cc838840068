#ifndef FREESB_MOMENTS_HPP
#define FREESB_MOMENTS_HPP

#include <cstdint>
#include <vector>

#include "freesb/operators.hpp"
#include "freesb/trace_poly.hpp"

namespace freesb {

// e^{prefactor_exp} * sum_i coeffs[i] t^i
struct TPoly {
    std::vector<Coeff> coeffs;
    double prefactor_exp = 0.0;

    static TPoly constant(Coeff c, double prefactor_exp = 0.0) { return {{c}, prefactor_exp}; }

    Coeff operator()(double t) const;
    TPoly derivative() const;
    TPoly integral() const;  // int_0^t
    TPoly& operator+=(const TPoly& o);
    TPoly& operator*=(Coeff c);
    friend TPoly operator*(const TPoly& a, const TPoly& b);
};

// sum_i coeffs[i] t^i with Laurent coefficients in u
struct TLaurentPoly {
    std::vector<TracePoly> coeffs;

    TracePoly operator()(double t) const;
    TLaurentPoly derivative() const;
    TLaurentPoly integral() const;
    TLaurentPoly& operator+=(const TLaurentPoly& o);
    friend TLaurentPoly operator*(const TPoly& a, const TLaurentPoly& b);
};

std::uint64_t catalan(int k);

Coeff nu(int k, double s);

TracePoly pi_eval(const TracePoly& p, double s);
TracePoly pi_via_semigroup(const TracePoly& p, double s, double tol = EXP_TOL);

// c_k(s, .) and b_k(s, ., u) for k >= 1, built by exact integration in t.
TPoly c_poly(int k, double s);
TLaurentPoly b_poly(int k, double s);
// All of c_1..c_K (index 0 unused) in one pass.
std::vector<TPoly> c_table(int K, double s);
std::vector<TLaurentPoly> b_table(int K, double s);

// The polynomial e^{kt/2} nu_k(t) from its own recursion.
TPoly varrho_poly(int k);
double varrho(int k, double t);

double nu_bound(int k, double t);
double c_bound(int k, double s, double t);
double b_bound(int k, double s, double t, Coeff u);

}  // namespace freesb

#endif
