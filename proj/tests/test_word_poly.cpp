#include <cmath>
#include <thread>

#include "doctest.h"

#include "freesb/matrix_lab.hpp"
#include "freesb/moments.hpp"
#include "freesb/rng.hpp"
#include "freesb/word_poly.hpp"

using namespace freesb;

namespace {

TracePoly mono(int u, std::vector<std::pair<int, int>> v, Coeff c = 1.0) {
    return TracePoly::monomial(TraceMono(u, std::move(v)), c);
}

// tr of the raw (uncanonicalized) letter product, straight from Eigen.
Coeff raw_trace(const std::string& letters, const CMatrix& Z) {
    const int N = static_cast<int>(Z.rows());
    const CMatrix Zi = Z.inverse();
    CMatrix P = CMatrix::Identity(N, N);
    for (char c : letters) {
        switch (c) {
            case 'a': P = P * Z; break;
            case 'A': P = P * Zi; break;
            case 's': P = P * Z.adjoint(); break;
            case 'S': P = P * Zi.adjoint(); break;
            default: break;
        }
    }
    return P.trace() / double(N);
}

std::vector<std::string> all_raw_words(int max_len) {
    std::vector<std::string> out{""};
    std::vector<std::string> layer{""};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        for (const auto& w : layer)
            for (char c : std::string("aAsS")) next.push_back(w + c);
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

// Finite-difference versions of A_{s,t} f and the weighted gradient product
// over the same explicit basis, with no jets: f(Z e^{hX}) sampled at +-h.
// Evaluated in long double so the h^-2 cancellation does not eat the
// tolerance on badly conditioned words.
using LCoeff = std::complex<long double>;
using LMatrix = Eigen::Matrix<LCoeff, Eigen::Dynamic, Eigen::Dynamic>;

LMatrix widen(const CMatrix& M) { return M.cast<LCoeff>(); }

LCoeff raw_trace_ld(const std::string& letters, const LMatrix& Z) {
    const auto N = Z.rows();
    const LMatrix Zi = Z.inverse();
    LMatrix P = LMatrix::Identity(N, N);
    for (char c : letters) {
        if (c == 'a') P = P * Z;
        if (c == 'A') P = P * Zi;
        if (c == 's') P = P * Z.adjoint();
        if (c == 'S') P = P * Zi.adjoint();
    }
    return P.trace() / static_cast<long double>(N);
}

// Taylor series is exact to long double precision for the tiny h X used here.
LMatrix expm_small(const LMatrix& A) {
    LMatrix sum = LMatrix::Identity(A.rows(), A.cols()), term = sum;
    for (int k = 1; k <= 12; ++k) {
        term = term * A / static_cast<long double>(k);
        sum += term;
    }
    return sum;
}

struct FdDirection {
    LMatrix plus, minus;
    long double weight;
};

std::vector<FdDirection> fd_directions(const BasisUN& beta, double s, double t, long double h) {
    std::vector<FdDirection> out;
    for (const auto& X : beta.elements) {
        const LMatrix x = widen(X);
        const LMatrix ix = LCoeff(0, 1) * x;
        out.push_back({expm_small(h * x), expm_small(-h * x), static_cast<long double>(s - t / 2)});
        out.push_back({expm_small(h * ix), expm_small(-h * ix), static_cast<long double>(t / 2)});
    }
    return out;
}

constexpr long double FD_STEP = 1e-4L;

Coeff fd_generator(const std::string& raw, const CMatrix& Z, const std::vector<FdDirection>& dirs) {
    const LMatrix z = widen(Z);
    const LCoeff f0 = raw_trace_ld(raw, z);
    LCoeff acc = 0;
    for (const auto& d : dirs) {
        const LCoeff second = (raw_trace_ld(raw, z * d.plus) - 2.0L * f0 + raw_trace_ld(raw, z * d.minus)) /
                              (FD_STEP * FD_STEP);
        acc += d.weight * second;
    }
    return Coeff(double(acc.real()), double(acc.imag()));
}

Coeff fd_cross(const std::string& a, const std::string& b, const CMatrix& Z, const std::vector<FdDirection>& dirs) {
    const LMatrix z = widen(Z);
    LCoeff acc = 0;
    for (const auto& d : dirs) {
        const LCoeff da = (raw_trace_ld(a, z * d.plus) - raw_trace_ld(a, z * d.minus)) / (2.0L * FD_STEP);
        const LCoeff db = (raw_trace_ld(b, z * d.plus) - raw_trace_ld(b, z * d.minus)) / (2.0L * FD_STEP);
        acc += d.weight * da * db;
    }
    return Coeff(double(acc.real()), double(acc.imag()));
}

WordPoly random_word_poly(Philox& rng, int n) {
    return iota(random_trace_poly(rng, n, 3, true)) + iota_star(random_trace_poly(rng, n, 2, true));
}

}  // namespace

TEST_CASE("canonicalize examples") {
    CHECK(canonicalize("aA").empty());
    CHECK(canonicalize("sa") == canonicalize("as"));
    CHECK(canonicalize("Aas") == canonicalize("s"));
    CHECK(canonicalize("sS").empty());
    CHECK(canonicalize("as").size() == 2);  // Z and Z* never cancel
    CHECK(canonicalize("aSsA").empty());
    CHECK(canonicalize("aaA").letters == "a");
    CHECK(canonicalize(std::vector<Letter>{Letter::Zinv, Letter::Z, Letter::Zstar}) == canonicalize("s"));
    CHECK(parse_word("aas S") == canonicalize("aasS"));
    CHECK_THROWS(parse_word("abc"));
}

TEST_CASE("canonicalize is idempotent and rotation invariant") {
    for (const auto& w : all_raw_words(5)) {
        Word c = canonicalize(w);
        CHECK(canonicalize(c.letters) == c);
        if (w.size() > 1) CHECK(canonicalize(w.substr(1) + w[0]) == c);
    }
}

TEST_CASE("canonical words have the same trace as the raw word") {
    Philox rng(41);
    std::vector<CMatrix> Zs;
    for (int i = 0; i < 3; ++i) Zs.push_back(random_gl(rng, 3));
    for (const auto& w : all_raw_words(4)) {
        Word c = canonicalize(w);
        for (const auto& Z : Zs) CHECK(std::abs(raw_trace(w, Z) - evaluate_word(c, Z)) < 1e-11);
    }
}

TEST_CASE("eps_word") {
    CHECK(eps_word(2, 0) == canonicalize("aa"));
    CHECK(eps_word(0, -1) == canonicalize("S"));
    CHECK(eps_word(1, 1) == canonicalize("as"));
    CHECK(eps_word(0, 0).empty());
}

TEST_CASE("iota and iota_star") {
    CHECK(iota(TracePoly::v(2)).approx_equal(WordPoly::var(canonicalize("aa"))));
    CHECK(iota_star(Coeff(2, 1) * TracePoly::v(1)).approx_equal(WordPoly::var(canonicalize("s"), Coeff(2, -1))));
    CHECK(iota(mono(0, {{3, 1}, {1, 1}})).degree() == 4);
    CHECK(iota_star(mono(0, {{3, 1}, {1, 1}})).degree() == 4);
    CHECK_THROWS(iota(TracePoly::u(1)));

    Philox rng(42);
    for (int i = 0; i < 20; ++i) {
        TracePoly q = random_trace_poly(rng, 4, 4, true);
        CMatrix Z = random_gl(rng, 3);
        Coeff direct = evaluate(q, Z)(0, 0);
        CHECK(std::abs(evaluate_word(iota(q), Z) - direct) < 1e-10);
        CHECK(std::abs(evaluate_word(iota_star(q), Z) - std::conj(direct)) < 1e-10);
    }
}

TEST_CASE("sesquilinear form examples") {
    CHECK(sesq_B(TracePoly::u(2), TracePoly::u(2)).approx_equal(WordPoly::var(canonicalize("aass"))));
    CHECK(sesq_B(1.0, 1.0).approx_equal(WordPoly(1.0)));
    WordPoly b = sesq_B(mono(1, {{1, 1}}), TracePoly::u(1));
    WordPoly want = WordPoly::var(eps_word(1, 1)) * WordPoly::var(eps_word(1, 0));
    CHECK(b.approx_equal(want));
    // conjugate linear in the second slot
    CHECK(sesq_B(TracePoly::u(1), Coeff(0, 1) * TracePoly::u(1))
              .approx_equal(Coeff(0, -1) * sesq_B(TracePoly::u(1), TracePoly::u(1))));
}

TEST_CASE("sesquilinear form evaluates to tr(P Q*)") {
    Philox rng(43);
    for (int i = 0; i < 30; ++i) {
        TracePoly P = random_trace_poly(rng, 3, 3);
        TracePoly Q = random_trace_poly(rng, 3, 3);
        CMatrix Z = random_gl(rng, 3);
        Coeff direct = tr(evaluate(P, Z) * evaluate(Q, Z).adjoint());
        CHECK(std::abs(evaluate_word(sesq_B(P, Q), Z) - direct) < 1e-10 * std::max(1.0, std::abs(direct)));
        if (P.size() == 1 && Q.size() == 1)
            CHECK(sesq_B(P, Q).degree() == trace_degree(P).value + trace_degree(Q).value);
    }
    for (int k = -2; k <= 2; ++k)
        for (int l = -2; l <= 2; ++l)
            CHECK(sesq_B(mono(k, {{1, 1}}), mono(l, {{-2, 1}})).degree() == std::abs(k) + std::abs(l) + 3);
}

TEST_CASE("Q for a single Z") {
    const Word z = canonicalize("a");
    for (auto [s, t] : {std::pair{1.0, 0.0}, {1.5, 0.8}, {0.9, 1.2}, {-0.5, 2.0}}) {
        WordPoly q = derive_generators(z, std::nullopt, s, t);
        CHECK(q.approx_equal(WordPoly::var(z, -(s - t))));
        CHECK(apply_tilde(TildeGen::Dst, WordPoly::var(z), s, t).approx_equal(WordPoly::var(z, -(s - t) / 2)));
    }
    CHECK(derive_generators(z, std::nullopt, 0.7, 0.7).is_zero());
    CHECK(derive_generators(canonicalize(""), std::nullopt, 1.0, 0.3).is_zero());
}

TEST_CASE("finite-difference oracle: Q matches A_{s,t} on every word of length <= 3") {
    Philox rng(44);
    const BasisUN beta = basis_uN(3);
    std::vector<CMatrix> Zs;
    for (int i = 0; i < 5; ++i) Zs.push_back(random_gl(rng, 3));
    double worst = 0.0;
    for (auto [s, t] : {std::pair{1.0, 0.0}, {1.5, 0.8}, {0.9, 1.2}}) {
        const auto dirs = fd_directions(beta, s, t, FD_STEP);
        for (const auto& raw : all_raw_words(3)) {
            const Word eps = canonicalize(raw);
            const WordPoly q = derive_generators(eps, std::nullopt, s, t);
            CHECK(q.homogeneous(int(eps.size())));
            for (const auto& Z : Zs) {
                const Coeff fd = fd_generator(raw, Z, dirs);
                const double err = std::abs(evaluate_word(q, Z) - fd);
                worst = std::max(worst, err);
                CHECK_MESSAGE(err < 1e-6, "word ", raw, " s=", s, " t=", t);
            }
        }
    }
    MESSAGE("max finite-difference error for Q: " << worst);
}

TEST_CASE("finite-difference oracle: R / N^2 matches the weighted gradient product") {
    Philox rng(45);
    const int N = 3;
    const BasisUN beta = basis_uN(N);
    std::vector<CMatrix> Zs;
    for (int i = 0; i < 5; ++i) Zs.push_back(random_gl(rng, N));
    const auto words = all_raw_words(2);
    for (auto [s, t] : {std::pair{1.5, 0.8}, {1.0, 2.5}}) {
        const auto dirs = fd_directions(beta, s, t, FD_STEP);
        for (const auto& a : words) {
            for (const auto& b : words) {
                const WordPoly r = derive_generators(canonicalize(a), canonicalize(b), s, t);
                // Free reduction can shorten the concatenated words (a with A),
                // so the degree is bounded by |eps| + |delta|; with no inverse
                // letters nothing cancels and R is homogeneous of that degree.
                const int d = int(canonicalize(a).size() + canonicalize(b).size());
                CHECK(r.degree() <= d);
                if ((a + b).find_first_of("AS") == std::string::npos && !r.is_zero()) CHECK(r.homogeneous(d));
                for (const auto& Z : Zs) {
                    const Coeff fd = fd_cross(a, b, Z, dirs);
                    CHECK_MESSAGE(std::abs(evaluate_word(r, Z) / double(N * N) - fd) < 1e-6, a, " ", b);
                }
            }
        }
    }
}

TEST_CASE("exact-jet oracles agree with the generators on longer words") {
    Philox rng(46);
    const int N = 4;
    for (int i = 0; i < 30; ++i) {
        std::string raw;
        const int len = 4 + i % 3;
        for (int j = 0; j < len; ++j) raw += "aAsS"[rng() % 4];
        std::string raw2;
        for (int j = 0; j < 3; ++j) raw2 += "aAsS"[rng() % 4];
        const Word e = canonicalize(raw), d = canonicalize(raw2);
        CMatrix Z = random_gl(rng, N);
        const double s = 1.5, t = 0.8;
        CHECK(std::abs(evaluate_word(derive_generators(e, std::nullopt, s, t), Z) - word_generator_eval(e, Z, s, t)) <
              1e-9);
        CHECK(std::abs(evaluate_word(derive_generators(e, d, s, t), Z) / double(N * N) -
                       word_cross_eval(e, d, Z, s, t)) < 1e-9);
    }
}

TEST_CASE("generator table is safe under concurrent first use") {
    std::vector<Word> words;
    for (const char* w : {"aasAss", "sSaaas", "aaaasS", "saSaAs", "asasas", "aaSSas"}) words.push_back(parse_word(w));
    std::vector<std::vector<WordPoly>> seen(4);
    std::vector<std::thread> pool;
    for (int k = 0; k < 4; ++k) {
        pool.emplace_back([&, k] {
            for (std::size_t i = 0; i < words.size(); ++i) {
                const auto& e = words[(i + k) % words.size()];
                const auto& d = words[(i + 2 * k + 1) % words.size()];
                seen[k].push_back(derive_generators(e, std::nullopt, 1.2, 0.5));
                seen[k].push_back(derive_generators(e, d, 1.2, 0.5));
            }
        });
    }
    for (auto& th : pool) th.join();
    for (int k = 0; k < 4; ++k) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto& e = words[(i + k) % words.size()];
            const auto& d = words[(i + 2 * k + 1) % words.size()];
            CHECK(seen[k][2 * i].approx_equal(derive_generators(e, std::nullopt, 1.2, 0.5)));
            CHECK(seen[k][2 * i + 1].approx_equal(derive_generators(e, d, 1.2, 0.5)));
        }
    }
}

TEST_CASE("word length cap") {
    CHECK_THROWS_AS(derive_generators(Word{std::string(25, 'a')}, std::nullopt, 1.0, 0.5), std::length_error);
}

TEST_CASE("tilde operators") {
    CHECK(apply_tilde(TildeGen::Dst, WordPoly(1.0), 1.0, 0.3).is_zero());
    CHECK(apply_tilde(TildeGen::Lst, WordPoly::var(canonicalize("aas")), 1.0, 0.3).is_zero());
    Philox rng(47);
    for (int i = 0; i < 20; ++i) {
        WordPoly p = random_word_poly(rng, 3);
        WordPoly q = random_word_poly(rng, 3);
        const double s = 1.3, t = 0.6;
        WordPoly lhs = apply_tilde(TildeGen::Dst, p * q, s, t);
        WordPoly rhs = apply_tilde(TildeGen::Dst, p, s, t) * q + p * apply_tilde(TildeGen::Dst, q, s, t);
        CHECK(lhs.approx_equal(rhs, 1e-10));
        const int d = p.degree();
        CHECK(apply_tilde(TildeGen::Dst, p, s, t).degree() <= d);
        CHECK(apply_tilde(TildeGen::Lst, p, s, t).degree() <= d);
    }
}

TEST_CASE("expectation examples") {
    const WordPoly z = iota(TracePoly::v(1));
    for (int N : {1, 2, 5, 16}) {
        for (auto [s, t] : {std::pair{1.0, 0.0}, {1.5, 0.8}}) {
            CHECK(std::abs(expectation(z, s, t, N) - std::exp(-(s - t) / 2)) < 1e-12);
            CHECK(std::abs(expectation(WordPoly(1.0), s, t, N) - 1.0) < 1e-14);
        }
    }
    CHECK_THROWS(expectation(z, 1.0, 0.0, 0));

    // E tr U^k under rho_s^N approaches nu_k(s) at rate 1/N^2.
    for (int k : {2, 3}) {
        const WordPoly vk = iota(TracePoly::v(k));
        const Coeff target = nu(k, 1.0);
        const double e8 = std::abs(expectation(vk, 1.0, 0.0, 8) - target);
        const double e32 = std::abs(expectation(vk, 1.0, 0.0, 32) - target);
        CHECK(e32 < e8);
        CHECK(e32 * 32 * 32 < 2 * e8 * 8 * 8);
    }
}

TEST_CASE("expectation at N = 1 is the scalar heat kernel") {
    // For N = 1 the rho_s process is e^{i B_s}, so E[z^k] = e^{-k^2 s / 2}.
    for (int k = 1; k <= 4; ++k) {
        Coeff e = expectation(iota(TracePoly::v(k)), 0.7, 0.0, 1);
        CHECK(std::abs(e - std::exp(-k * k * 0.7 / 2)) < 1e-12);
    }
}

TEST_CASE("property: expectation is linear and real on B(p, p)") {
    Philox rng(48);
    for (int i = 0; i < 10; ++i) {
        WordPoly p = random_word_poly(rng, 3);
        WordPoly q = random_word_poly(rng, 3);
        const Coeff a(0.3, -1.1);
        const Coeff lhs = expectation(p + a * q, 1.4, 0.6, 3);
        const Coeff rhs = expectation(p, 1.4, 0.6, 3) + a * expectation(q, 1.4, 0.6, 3);
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));

        TracePoly r = random_trace_poly(rng, 3, 3);
        const Coeff n = expectation(sesq_B(r, r), 1.4, 0.6, 3);
        CHECK(std::abs(n.imag()) < 1e-10 * std::max(1.0, std::abs(n)));
        CHECK(n.real() > -1e-10);
    }
}

TEST_CASE("property: the N -> infinity semigroup is evaluation at nu(s - t)") {
    Philox rng(49);
    for (int i = 0; i < 15; ++i) {
        TracePoly Q = random_trace_poly(rng, 4, 4, true);
        const double s = 1.5, t = 0.8;
        auto gen = [&](const WordPoly& p) { return apply_tilde(TildeGen::Dst, p, s, t); };
        auto norm = [](const WordPoly& p) { return p.max_abs(); };
        Coeff lhs = taylor_exp(gen, 1.0, iota(Q), 1e-14, norm).at_ones();
        Coeff rhs = pi_eval(Q, s - t).coeff_u(0);
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("l2 norms") {
    for (int N : {1, 3, 8}) {
        CHECK(std::abs(l2_norm_sq(1.0, Measure::Rho(1.0, N)) - 1.0) < 1e-13);
        CHECK(std::abs(l2_norm_sq(1.0, Measure::Mu(1.5, 0.8, N)) - 1.0) < 1e-13);
        CHECK(std::abs(l2_norm_sq(TracePoly::u(1), Measure::Rho(1.3, N)) - 1.0) < 1e-12);
        CHECK(std::abs(l2_norm_sq(TracePoly::u(3), Measure::Rho(0.4, N)) - 1.0) < 1e-12);
    }
    // E tr(Z Z*) under mu: not 1, but positive and finite
    CHECK(l2_norm_sq(TracePoly::u(1), Measure::Mu(1.5, 0.8, 4)) > 1.0);
}
