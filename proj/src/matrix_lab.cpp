#include "freesb/matrix_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <numeric>
#include <thread>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "freesb/moments.hpp"

namespace freesb {

Coeff Tr(const CMatrix& A) { return A.trace(); }
Coeff tr(const CMatrix& A) { return A.trace() / double(A.rows()); }
Coeff inner_uN(const CMatrix& X, const CMatrix& Y) { return double(X.rows()) * (Y.adjoint() * X).trace(); }

namespace {

CMatrix identity(int N) { return CMatrix::Identity(N, N); }

double max_abs(const CMatrix& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// ---------------------------------------------------------------- basis

BasisUN basis_uN(int N) {
    if (N < 1 || N > 128) throw std::invalid_argument("basis_uN: N must be in [1, 128]");
    BasisUN b;
    b.N = N;
    const double off = 1.0 / std::sqrt(2.0 * N), diag = 1.0 / std::sqrt(double(N));
    const Coeff I(0.0, 1.0);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) {
            CMatrix X = CMatrix::Zero(N, N);
            X(j, k) = off;
            X(k, j) = -off;
            b.elements.push_back(X);
        }
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) {
            CMatrix X = CMatrix::Zero(N, N);
            X(j, k) = I * off;
            X(k, j) = I * off;
            b.elements.push_back(X);
        }
    for (int j = 0; j < N; ++j) {
        CMatrix X = CMatrix::Zero(N, N);
        X(j, j) = I * diag;
        b.elements.push_back(X);
    }
    return b;
}

double BasisUN::gram_defect() const {
    double d = 0.0;
    for (std::size_t a = 0; a < elements.size(); ++a)
        for (std::size_t c = 0; c < elements.size(); ++c) {
            Coeff g = inner_uN(elements[a], elements[c]);
            d = std::max(d, std::abs(g - Coeff(a == c ? 1.0 : 0.0)));
        }
    return d;
}

double BasisUN::anti_hermitian_defect() const {
    double d = 0.0;
    for (const auto& X : elements) d = std::max(d, max_abs(X + X.adjoint()));
    return d;
}

CMatrix random_ginibre(Philox& rng, int N) {
    CMatrix G(N, N);
    const double sc = 1.0 / std::sqrt(2.0 * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) G(i, j) = Coeff(rng.normal(), rng.normal()) * sc;
    return G;
}

CMatrix random_unitary(Philox& rng, int N) {
    CMatrix G = random_ginibre(rng, N);
    Eigen::HouseholderQR<CMatrix> qr(G);
    CMatrix Q = qr.householderQ();
    CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < N; ++j) {
        Coeff d = R(j, j);
        Coeff ph = std::abs(d) > 0 ? d / std::abs(d) : Coeff(1.0);
        Q.col(j) *= ph;
    }
    return Q;
}

CMatrix random_gl(Philox& rng, int N) { return identity(N) + 0.3 * random_ginibre(rng, N); }

// ---------------------------------------------------------------- magic formulas

double MagicReport::max() const { return std::max({sum_sq, sandwich, projection, cross}); }

MagicReport verify_magic(int N, double tol, std::uint64_t seed) {
    Philox rng(seed, static_cast<std::uint64_t>(N));
    const CMatrix A = random_ginibre(rng, N) * std::sqrt(2.0 * N);
    const CMatrix B = random_ginibre(rng, N) * std::sqrt(2.0 * N);
    const BasisUN basis = basis_uN(N);
    const double n2 = double(N) * N;

    CMatrix s1 = CMatrix::Zero(N, N), s2 = CMatrix::Zero(N, N), s3 = CMatrix::Zero(N, N);
    Coeff s4 = 0.0;
    for (const auto& X : basis.elements) {
        s1 += X * X;
        s2 += X * A * X;
        s3 += tr(X * A) * X;
        s4 += tr(X * A) * tr(X * B);
    }
    MagicReport r;
    r.N = N;
    r.sum_sq = max_abs(s1 + identity(N));
    r.sandwich = max_abs(s2 + tr(A) * identity(N));
    r.projection = max_abs(s3 + A / n2);
    r.cross = std::abs(s4 + tr(A * B) / n2);
    r.ok = r.max() < tol;
    return r;
}

// ---------------------------------------------------------------- evaluation

namespace {

CMatrix checked_inverse(const CMatrix& Z) {
    Eigen::PartialPivLU<CMatrix> lu(Z);
    if (std::abs(lu.determinant()) <= 1e-300) throw SingularMatrix("matrix is singular to working precision");
    return lu.inverse();
}

class Powers {
public:
    explicit Powers(const CMatrix& Z) : Z_(Z) {}
    const CMatrix& get(int k) {
        auto it = cache_.find(k);
        if (it != cache_.end()) return it->second;
        CMatrix r;
        if (k == 0)
            r = identity(static_cast<int>(Z_.rows()));
        else if (k > 0)
            r = get(k - 1) * Z_;
        else {
            if (!inv_) inv_ = checked_inverse(Z_);
            r = get(k + 1) * *inv_;
        }
        return cache_.emplace(k, std::move(r)).first->second;
    }

private:
    const CMatrix& Z_;
    std::optional<CMatrix> inv_;
    std::map<int, CMatrix> cache_;
};

}  // namespace

CMatrix evaluate(const TracePoly& p, const CMatrix& Z) {
    const int N = static_cast<int>(Z.rows());
    Powers pw(Z);
    std::map<int, Coeff> traces;
    CMatrix out = CMatrix::Zero(N, N);
    for (const auto& [m, c] : p.terms()) {
        Coeff scal = c;
        for (auto [j, e] : m.v) {
            auto it = traces.find(j);
            if (it == traces.end()) it = traces.emplace(j, tr(pw.get(j))).first;
            scal *= std::pow(it->second, e);
        }
        out += scal * pw.get(m.u_exp);
    }
    return out;
}

namespace {

CMatrix letter_matrix(char l, const CMatrix& Z, const CMatrix* inv) {
    switch (l) {
        case 'a': return Z;
        case 'A': return *inv;
        case 's': return Z.adjoint();
        default: return inv->adjoint();
    }
}

}  // namespace

Coeff evaluate_word(const Word& w, const CMatrix& Z) {
    if (w.empty()) return 1.0;
    std::optional<CMatrix> inv;
    if (w.letters.find_first_of("AS") != std::string::npos) inv = checked_inverse(Z);
    CMatrix P = identity(static_cast<int>(Z.rows()));
    for (char l : w.letters) P = P * letter_matrix(l, Z, inv ? &*inv : nullptr);
    return tr(P);
}

Coeff evaluate_word(const WordPoly& pw, const CMatrix& Z) {
    std::map<Word, Coeff> cache;
    Coeff out = 0.0;
    for (const auto& [m, c] : pw.terms()) {
        Coeff x = c;
        for (const auto& [w, e] : m.factors) {
            auto it = cache.find(w);
            if (it == cache.end()) it = cache.emplace(w, evaluate_word(w, Z)).first;
            x *= std::pow(it->second, e);
        }
        out += x;
    }
    return out;
}

// ---------------------------------------------------------------- exact derivatives

namespace {

// Value with first and second derivative in the curve parameter.
struct Jet {
    CMatrix v, d1, d2;
};

Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * (a.d1 * b.d1) + a.v * b.d2};
}

struct ScalarJet {
    Coeff v = 1.0, d1 = 0.0, d2 = 0.0;
};

ScalarJet operator*(const ScalarJet& a, const ScalarJet& b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}

Jet scale(const Jet& m, const ScalarJet& s) {
    return {m.v * s.v, m.d1 * s.v + m.v * s.d1, m.d2 * s.v + 2.0 * m.d1 * s.d1 + m.v * s.d2};
}

ScalarJet trace_jet(const Jet& j) { return {tr(j.v), tr(j.d1), tr(j.d2)}; }

// Jets of (U e^{hX})^n at h = 0.
class PowerJets {
public:
    PowerJets(const CMatrix& U, const CMatrix& Uinv, const CMatrix& X) {
        const int N = static_cast<int>(U.rows());
        const CMatrix X2 = X * X;
        up_ = {U, U * X, U * X2};
        down_ = {Uinv, -X * Uinv, X2 * Uinv};
        const CMatrix I = identity(N), O = CMatrix::Zero(N, N);
        cache_.emplace(0, Jet{I, O, O});
    }
    const Jet& get(int n) {
        auto it = cache_.find(n);
        if (it != cache_.end()) return it->second;
        Jet r = n > 0 ? get(n - 1) * up_ : get(n + 1) * down_;
        return cache_.emplace(n, std::move(r)).first->second;
    }

private:
    Jet up_, down_;
    std::map<int, Jet> cache_;
};

}  // namespace

CMatrix laplacian_eval(const TracePoly& p, const CMatrix& U, int N) {
    if (U.rows() != N || U.cols() != N) throw std::invalid_argument("laplacian_eval: U must be N x N");
    const CMatrix Uinv = checked_inverse(U);
    const BasisUN basis = basis_uN(N);
    CMatrix out = CMatrix::Zero(N, N);
    for (const auto& X : basis.elements) {
        PowerJets pj(U, Uinv, X);
        for (const auto& [m, c] : p.terms()) {
            ScalarJet s;
            for (auto [j, e] : m.v) {
                ScalarJet tj = trace_jet(pj.get(j));
                for (int r = 0; r < e; ++r) s = s * tj;
            }
            out += c * scale(pj.get(m.u_exp), s).d2;
        }
    }
    return out;
}

namespace {

Jet letter_jet(char l, const CMatrix& Z, const CMatrix& Zinv, const CMatrix& xi) {
    const CMatrix xs = xi.adjoint();
    switch (l) {
        case 'a': return {Z, Z * xi, Z * xi * xi};
        case 'A': return {Zinv, -xi * Zinv, xi * xi * Zinv};
        case 's': {
            CMatrix Zs = Z.adjoint();
            return {Zs, xs * Zs, xs * xs * Zs};
        }
        default: {
            CMatrix W = Zinv.adjoint();
            return {W, -W * xs, W * xs * xs};
        }
    }
}

ScalarJet word_jet(const Word& w, const CMatrix& Z, const CMatrix& Zinv, const CMatrix& xi) {
    const int N = static_cast<int>(Z.rows());
    if (w.empty()) return {1.0, 0.0, 0.0};
    Jet acc{identity(N), CMatrix::Zero(N, N), CMatrix::Zero(N, N)};
    for (char l : w.letters) acc = acc * letter_jet(l, Z, Zinv, xi);
    return trace_jet(acc);
}

template <class F>
Coeff family_sum(const CMatrix& Z, double s, double t, F&& per_xi) {
    const int N = static_cast<int>(Z.rows());
    const BasisUN basis = basis_uN(N);
    const Coeff I(0.0, 1.0);
    Coeff plus = 0.0, minus = 0.0;
    for (const auto& X : basis.elements) {
        plus += per_xi(X);
        minus += per_xi(CMatrix(I * X));
    }
    return (s - t / 2.0) * plus + (t / 2.0) * minus;
}

}  // namespace

Coeff word_generator_eval(const Word& eps, const CMatrix& Z, double s, double t) {
    const CMatrix Zinv = checked_inverse(Z);
    return family_sum(Z, s, t, [&](const CMatrix& xi) { return word_jet(eps, Z, Zinv, xi).d2; });
}

Coeff word_cross_eval(const Word& eps, const Word& delta, const CMatrix& Z, double s, double t) {
    const CMatrix Zinv = checked_inverse(Z);
    return family_sum(Z, s, t, [&](const CMatrix& xi) {
        return word_jet(eps, Z, Zinv, xi).d1 * word_jet(delta, Z, Zinv, xi).d1;
    });
}

// ---------------------------------------------------------------- expm

CMatrix expm(const CMatrix& M, double tol) {
    const int N = static_cast<int>(M.rows());
    if (N == 0) return M;
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const CMatrix A = M / std::ldexp(1.0, squarings);
    CMatrix sum = identity(N), term = identity(N);
    for (int k = 1; k < 60; ++k) {
        term = term * A / double(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= tol * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

double unitarity_defect(const CMatrix& U) { return max_abs(U.adjoint() * U - identity(static_cast<int>(U.rows()))); }

// ---------------------------------------------------------------- samplers

void SamplerCfg::validate(bool mu) const {
    if (N < 1 || N > 128) throw std::invalid_argument("sampler: N must be in [1, 128]");
    if (steps < 1) throw std::invalid_argument("sampler: steps must be >= 1");
    if (mu && !(s > t / 2.0)) throw std::invalid_argument("sampler: mu needs s > t/2");
    if (mu && t < 0) throw std::invalid_argument("sampler: mu needs t >= 0");
    if (!mu && s < 0) throw std::invalid_argument("sampler: rho needs s >= 0");
}

namespace {

// sum_b xi_b b over the u_N basis with i.i.d. standard normal xi_b.
CMatrix gaussian_uN(Philox& rng, int N) {
    const double off = 1.0 / std::sqrt(2.0 * N), diag = 1.0 / std::sqrt(double(N));
    CMatrix G = CMatrix::Zero(N, N);
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k) {
            double a = rng.normal() * off, b = rng.normal() * off;
            G(j, k) = Coeff(a, b);
            G(k, j) = Coeff(-a, b);
        }
    for (int j = 0; j < N; ++j) G(j, j) = Coeff(0.0, rng.normal() * diag);
    return G;
}

CMatrix polar_unitary(const CMatrix& U) {
    Eigen::JacobiSVD<CMatrix> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

CMatrix sample_rho(const SamplerCfg& cfg, std::uint64_t index) {
    cfg.validate(false);
    const int N = cfg.N;
    CMatrix U = identity(N);
    if (cfg.s == 0.0) return U;
    Philox rng(cfg.seed, index);
    const double sd = std::sqrt(cfg.s / cfg.steps);
    for (int k = 0; k < cfg.steps; ++k) U = U * expm(sd * gaussian_uN(rng, N));
    if (cfg.polar_correct) U = polar_unitary(U);
    return U;
}

CMatrix sample_mu(const SamplerCfg& cfg, std::uint64_t index) {
    cfg.validate(true);
    const int N = cfg.N;
    CMatrix Z = identity(N);
    Philox rng(cfg.seed, index);
    const double sd = std::sqrt(1.0 / cfg.steps);
    const double a = std::sqrt(cfg.s - cfg.t / 2.0), b = std::sqrt(cfg.t / 2.0);
    const Coeff I(0.0, 1.0);
    for (int k = 0; k < cfg.steps; ++k) {
        CMatrix G1 = gaussian_uN(rng, N);
        CMatrix G2 = gaussian_uN(rng, N);
        Z = Z * expm(sd * (a * G1 + (b * I) * G2));
    }
    return Z;
}

McResult mc_expectation(const MatrixFunctional& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads) {
    if (nsamples < 2) throw std::invalid_argument("mc_expectation: need at least two samples");
    cfg.validate(mu);
    std::vector<Coeff> vals(static_cast<std::size_t>(nsamples));
    unsigned nt = threads > 0 ? unsigned(threads) : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<unsigned>(nt, static_cast<unsigned>(nsamples));
    auto work = [&](unsigned tid) {
        for (long i = tid; i < nsamples; i += nt) {
            const auto idx = static_cast<std::uint64_t>(i);
            vals[static_cast<std::size_t>(i)] = f(mu ? sample_mu(cfg, idx) : sample_rho(cfg, idx));
        }
    };
    if (nt == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    McResult r;
    r.n = nsamples;
    Coeff sum = 0.0;
    for (auto v : vals) sum += v;
    r.mean = sum / double(nsamples);
    double ss = 0.0;
    for (auto v : vals) ss += std::norm(v - r.mean);
    r.stderr_ = std::sqrt(ss / double(nsamples - 1) / double(nsamples));
    return r;
}

McResult mc_expectation(const TracePoly& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads) {
    return mc_expectation([&f](const CMatrix& Z) { return tr(evaluate(f, Z)); }, cfg, nsamples, mu, threads);
}

McResult mc_expectation(const WordPoly& f, const SamplerCfg& cfg, long nsamples, bool mu, int threads) {
    return mc_expectation([&f](const CMatrix& Z) { return evaluate_word(f, Z); }, cfg, nsamples, mu, threads);
}

// ---------------------------------------------------------------- concentration

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need matching samples");
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConcentrationTable concentration_experiment(const TracePoly& p, double s, double t, const std::vector<int>& Ns,
                                            ConcMode mode, const SamplerCfg& mc_cfg, long mc_samples,
                                            int threads) {
    if (Ns.size() < 3) throw std::invalid_argument("concentration: need at least three N values");
    if (!std::is_sorted(Ns.begin(), Ns.end())) throw std::invalid_argument("concentration: Ns must ascend");
    const bool mu = t != 0.0;
    const TracePoly d = p - pi_eval(p, mu ? s - t : s);
    ConcentrationTable tab;
    std::vector<double> xs, ys;
    for (int N : Ns) {
        ConcentrationRow row;
        row.N = N;
        if (mode == ConcMode::symbolic) {
            row.value = l2_norm_sq(d, mu ? Measure::Mu(s, t, N) : Measure::Rho(s, N));
        } else {
            SamplerCfg cfg = mc_cfg;
            cfg.N = N;
            cfg.s = s;
            cfg.t = t;
            auto r = mc_expectation(
                [&d](const CMatrix& Z) {
                    CMatrix D = evaluate(d, Z);
                    return tr(D * D.adjoint());
                },
                cfg, mc_samples, mu, threads);
            row.value = r.mean.real();
            row.stderr_ = r.stderr_;
        }
        xs.push_back(N);
        ys.push_back(row.value);
        tab.rows.push_back(row);
    }
    const bool positive = std::all_of(ys.begin(), ys.end(), [](double v) { return v > 0; });
    tab.slope = positive ? loglog_slope(xs, ys) : std::nan("");
    return tab;
}

double equivariance_check(const TracePoly& p, int N, std::uint64_t seed) {
    Philox rng(seed, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        CMatrix U = random_unitary(rng, N), V = random_unitary(rng, N);
        CMatrix lhs = evaluate(p, V * U * V.adjoint());
        CMatrix rhs = V * evaluate(p, U) * V.adjoint();
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

ZeroTest zero_test(const TracePoly& p, int N, int trials, std::uint64_t seed) {
    Philox rng(seed, 1);
    ZeroTest z;
    z.min_norm = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < trials; ++trial) {
        // distinct eigenvalues spread around the circle with moduli in [0.5, 1.5]
        CMatrix D = CMatrix::Zero(N, N);
        for (int j = 0; j < N; ++j) {
            double angle = 2.0 * std::numbers::pi * (j + 0.8 * rng.uniform()) / N;
            D(j, j) = std::polar(0.5 + rng.uniform(), angle);
        }
        double n = evaluate(p, D).norm();
        z.max_norm = std::max(z.max_norm, n);
        z.min_norm = std::min(z.min_norm, n);
    }
    return z;
}

}  // namespace freesb
