#ifndef FREESB_TRANSFORM_HPP
#define FREESB_TRANSFORM_HPP

#include <vector>

#include "freesb/moments.hpp"
#include "freesb/operators.hpp"
#include "freesb/trace_poly.hpp"

namespace freesb {

// G_{s,t} = pi_{s-t} o e^{(t/2)D},  H_{s,t} = pi_s o e^{-(t/2)D}
TracePoly transform_G(const TracePoly& f, double s, double t, double tol = EXP_TOL);
TracePoly transform_H(const TracePoly& f, double s, double t, double tol = EXP_TOL);

// p_k^{s,t} = H_{s,t}(u^k)
TracePoly biane(int k, double s, double t);

// Truncated power series in z with Laurent-in-u coefficients, indices 0..K.
class TPolySeries {
public:
    TPolySeries() = default;
    explicit TPolySeries(int K) : c_(static_cast<std::size_t>(K) + 1) {}
    TPolySeries(int K, std::vector<TracePoly> coeffs);

    static TPolySeries constant(int K, const TracePoly& c);
    static TPolySeries z(int K);  // the identity series
    // (1 + z) / (1 - z) scaled by a
    static TPolySeries mobius(int K, Coeff a);

    int order() const { return static_cast<int>(c_.size()) - 1; }
    const TracePoly& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    TracePoly& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
    const std::vector<TracePoly>& coeffs() const { return c_; }

    TPolySeries& operator+=(const TPolySeries& o);
    TPolySeries& operator-=(const TPolySeries& o);
    TPolySeries& operator*=(Coeff a);
    friend TPolySeries operator+(TPolySeries a, const TPolySeries& b) { return a += b; }
    friend TPolySeries operator-(TPolySeries a, const TPolySeries& b) { return a -= b; }
    friend TPolySeries operator*(const TPolySeries& a, const TPolySeries& b);
    friend TPolySeries operator*(TPolySeries a, Coeff c) { return a *= c; }

    double max_abs() const;

private:
    std::vector<TracePoly> c_;
};

class SeriesError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Constant terms must be u-free wherever the operation needs a scalar.
TPolySeries series_exp(const TPolySeries& f);
TPolySeries series_recip(const TPolySeries& f);
// f(g(z)); g must have zero constant term and scalar coefficients.
TPolySeries series_compose(const TPolySeries& f, const TPolySeries& g);
// Compositional inverse of g with g(0) = 0 and scalar g'(0) != 0.
TPolySeries series_revert(const TPolySeries& g);
// z * d/dz
TPolySeries series_zdz(const TPolySeries& f);

TPolySeries Pi_series(double s, double t, int K);

struct GenFnReport {
    double max_residual = 0.0;
    std::vector<double> residual_by_order;  // index 1..K
    bool ok = false;
};
GenFnReport verify_gen_fn(double s, double t, int K, double tol = 1e-8);

// (1 - u z e^{(t/2)(1+z)/(1-z)})^{-1} - 1, the explicit s = t form.
TPolySeries explicit_st_series(double t, int K);

// psi^s(t, z), phi^{s,u}(t, z) and rho(s, z) as order-K series at fixed times.
TPolySeries psi_series(double s, double t, int K);
TPolySeries phi_series(double s, double t, int K);
TPolySeries varrho_series(double s, int K);

struct PdeReport {
    double psi_residual = 0.0;
    double phi_residual = 0.0;
    double varrho_residual = 0.0;
    double varrho_initial = 0.0;
    double phi_initial = 0.0;
    double implicit_psi = 0.0;
    double max() const;
};
PdeReport pde_residual(double s, const std::vector<double>& t_grid, int K);

}  // namespace freesb

#endif
