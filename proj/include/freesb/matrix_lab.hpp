#ifndef FREESB_MATRIX_LAB_HPP
#define FREESB_MATRIX_LAB_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "freesb/operators.hpp"
#include "freesb/rng.hpp"
#include "freesb/trace_poly.hpp"
#include "freesb/word_poly.hpp"

namespace freesb {

// CMatrix (row-major dense complex) comes from operators.hpp.

Coeff Tr(const CMatrix& A);
Coeff tr(const CMatrix& A);  // normalized: tr(I) = 1
// <X, Y> = N Tr(Y* X)
Coeff inner_uN(const CMatrix& X, const CMatrix& Y);

struct BasisUN {
    int N = 0;
    std::vector<CMatrix> elements;

    double gram_defect() const;          // max |Gram - I|
    double anti_hermitian_defect() const;
};
BasisUN basis_uN(int N);

CMatrix random_ginibre(Philox& rng, int N);  // entries N(0,1)+iN(0,1), scaled by 1/sqrt(2N)
CMatrix random_unitary(Philox& rng, int N);  // Haar
CMatrix random_gl(Philox& rng, int N);       // I + Ginibre/2, well conditioned

struct MagicReport {
    int N = 0;
    double sum_sq = 0.0;      // sum X^2 = -I
    double sandwich = 0.0;    // sum X A X = -tr(A) I
    double projection = 0.0;  // sum tr(XA) X = -A / N^2
    double cross = 0.0;       // sum tr(XA) tr(XB) = -tr(AB) / N^2
    double max() const;
    bool ok = false;
};
MagicReport verify_magic(int N, double tol = 1e-11, std::uint64_t seed = 1);

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

CMatrix evaluate(const TracePoly& p, const CMatrix& Z);
Coeff evaluate_word(const Word& w, const CMatrix& Z);
Coeff evaluate_word(const WordPoly& pw, const CMatrix& Z);

// sum over the u_N basis of the second right-invariant derivative of P_N at U,
// computed exactly (no finite differences).
CMatrix laplacian_eval(const TracePoly& p, const CMatrix& U, int N);

// A_{s,t} V_eps(Z) and sum_xi weighted (d_xi V_eps)(d_xi V_delta), both by
// exact derivatives over the explicit basis.
Coeff word_generator_eval(const Word& eps, const CMatrix& Z, double s, double t);
Coeff word_cross_eval(const Word& eps, const Word& delta, const CMatrix& Z, double s, double t);

CMatrix expm(const CMatrix& M, double tol = 1e-16);
double unitarity_defect(const CMatrix& U);

struct SamplerCfg {
    int N = 8;
    double s = 1.0;
    double t = 0.0;
    int steps = 200;
    std::uint64_t seed = 20240607;
    bool polar_correct = false;

    void validate(bool mu) const;
};
CMatrix sample_rho(const SamplerCfg& cfg, std::uint64_t index);
CMatrix sample_mu(const SamplerCfg& cfg, std::uint64_t index);

struct McResult {
    Coeff mean = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};
using MatrixFunctional = std::function<Coeff(const CMatrix&)>;
// threads <= 0 means all available cores; the result does not depend on it.
McResult mc_expectation(const MatrixFunctional& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads = 0);
// Trace polynomials enter through the normalized trace of their matrix value.
McResult mc_expectation(const TracePoly& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads = 0);
McResult mc_expectation(const WordPoly& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads = 0);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ConcentrationRow {
    int N = 0;
    double value = 0.0;
    double stderr_ = 0.0;
};
struct ConcentrationTable {
    std::vector<ConcentrationRow> rows;
    double slope = 0.0;
};
enum class ConcMode { symbolic, mc };
// ||P_N - [pi P]_N||^2 under rho_s (t == 0, pi = pi_s) or mu_{s,t} (pi = pi_{s-t}).
ConcentrationTable concentration_experiment(const TracePoly& p, double s, double t, const std::vector<int>& Ns,
                                            ConcMode mode, const SamplerCfg& mc_cfg = {}, long mc_samples = 2000,
                                            int threads = 0);

double equivariance_check(const TracePoly& p, int N, std::uint64_t seed);
struct ZeroTest {
    double max_norm = 0.0;  // largest ||P_N(D)|| over the trials
    double min_norm = 0.0;  // smallest, for the nonvanishing direction
};
// P_N at random diagonal matrices with distinct eigenvalues.
ZeroTest zero_test(const TracePoly& p, int N, int trials, std::uint64_t seed);

}  // namespace freesb

#endif
