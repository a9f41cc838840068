#ifndef FREESB_OPERATORS_HPP
#define FREESB_OPERATORS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "freesb/trace_poly.hpp"

namespace freesb {

inline constexpr int MAX_DEGREE = 12;
inline constexpr std::size_t BASIS_CAP = 200000;
inline constexpr int MAX_TERMS = 500;
inline constexpr double EXP_TOL = 1e-13;

enum class OpName { N0, N1, Y, Z, L, Aplus, Aminus, sgn, Mu };

TracePoly apply_named(OpName name, const TracePoly& p, std::optional<int> k = std::nullopt);

// D = -N0 - N1 - 2Z - 2Y
TracePoly apply_D(const TracePoly& p);
// D_N = D - L / N^2
TracePoly apply_DN(const TracePoly& p, int N);

enum class GenName { D, L, N0, N1, Y, Z, PI_GEN };

struct GeneratorSpec {
    std::vector<std::pair<GenName, Coeff>> terms;

    static GeneratorSpec D() { return {{{GenName::D, 1.0}}}; }
    static GeneratorSpec DN(int N);
    static GeneratorSpec pi_gen() { return {{{GenName::PI_GEN, 1.0}}}; }

    TracePoly apply(const TracePoly& p) const;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Generic adaptive Taylor for e^{theta G} on any vector type with +, scalar *,
// and a norm.  Stops once three consecutive terms fall below tol * |sum|.
template <class V, class Apply, class Norm>
V taylor_exp(const Apply& apply, double theta, const V& p, double tol, const Norm& norm) {
    V sum = p;
    V term = p;
    int small = 0;
    for (int m = 1; m <= MAX_TERMS; ++m) {
        term = apply(term);
        term *= Coeff(theta / m);
        sum += term;
        double tn = norm(term);
        if (!std::isfinite(tn) || !std::isfinite(norm(sum))) throw ConvergenceError("Taylor series overflowed");
        if (tn <= tol * norm(sum) || tn == 0.0) {
            if (++small >= 3) return sum;
        } else {
            small = 0;
        }
    }
    throw ConvergenceError("Taylor series did not converge within MAX_TERMS");
}

TracePoly exp_apply(const GeneratorSpec& gen, double theta, const TracePoly& p, double tol = EXP_TOL);

using CMatrix = Eigen::Matrix<Coeff, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct OperatorMatrix {
    int n = 0;
    std::vector<TraceMono> basis;
    CMatrix entries;

    std::ptrdiff_t index_of(const TraceMono& m) const;
    Eigen::VectorXcd coords(const TracePoly& p) const;
    TracePoly from_coords(const Eigen::VectorXcd& x) const;
    // Submatrix on the span of the given basis monomials.
    CMatrix restrict_to(const std::vector<TraceMono>& sub) const;
};

OperatorMatrix operator_matrix(const GeneratorSpec& gen, int n);

}  // namespace freesb

#endif
