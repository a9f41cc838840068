#ifndef FREESB_WORD_POLY_HPP
#define FREESB_WORD_POLY_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "freesb/operators.hpp"
#include "freesb/trace_poly.hpp"

namespace freesb {

enum class Letter : char { Z = 'a', Zinv = 'A', Zstar = 's', Zstarinv = 'S' };

// Cyclic word over {Z, Z^-1, Z*, Z*^-1}, stored as its letter codes
// ("a", "A", "s", "S").  Always canonical once constructed through
// canonicalize(); the empty word stands for tr(I) = 1.
struct Word {
    std::string letters;

    std::size_t size() const { return letters.size(); }
    bool empty() const { return letters.empty(); }
    auto operator<=>(const Word&) const = default;
    bool operator==(const Word&) const = default;
};

Word canonicalize(std::string_view raw);
Word canonicalize(const std::vector<Letter>& raw);
Word parse_word(std::string_view text);  // whitespace ignored
std::string format_word(const Word& w);

// Word for Z^j (Z*)^k with negative exponents meaning inverses.
Word eps_word(int j, int k);

struct WordMono {
    std::vector<std::pair<Word, int>> factors;  // sorted, exponents >= 1, no empty word

    WordMono() = default;
    explicit WordMono(std::vector<std::pair<Word, int>> f);
    static WordMono of(const Word& w);

    int degree() const;
    int exponent(const Word& w) const;
    WordMono operator*(const WordMono& o) const;
    auto operator<=>(const WordMono&) const = default;
    bool operator==(const WordMono&) const = default;
};

class WordPoly {
public:
    using Terms = std::map<WordMono, Coeff>;

    WordPoly() = default;
    WordPoly(Coeff c);  // NOLINT
    WordPoly(double c) : WordPoly(Coeff(c)) {}
    static WordPoly monomial(const WordMono& m, Coeff c = 1.0);
    static WordPoly var(const Word& w, Coeff c = 1.0);

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    Coeff coeff(const WordMono& m) const;

    void accumulate(const WordMono& m, Coeff c);
    WordPoly& prune();

    double max_abs() const;
    int degree() const;  // 0 for the zero polynomial
    bool homogeneous(int d) const;
    // Value with every v_eps set to 1.
    Coeff at_ones() const;

    WordPoly& operator+=(const WordPoly& o);
    WordPoly& operator-=(const WordPoly& o);
    WordPoly& operator*=(Coeff c);
    friend WordPoly operator+(WordPoly a, const WordPoly& b) { return a += b; }
    friend WordPoly operator-(WordPoly a, const WordPoly& b) { return a -= b; }
    friend WordPoly operator*(const WordPoly& a, const WordPoly& b);
    friend WordPoly operator*(WordPoly a, Coeff c) { return a *= c; }
    friend WordPoly operator*(Coeff c, WordPoly a) { return a *= c; }
    friend WordPoly operator*(WordPoly a, double c) { return a *= Coeff(c); }
    friend WordPoly operator*(double c, WordPoly a) { return a *= Coeff(c); }

    bool approx_equal(const WordPoly& o, double eps = EQ_EPS) const;

private:
    Terms terms_;
};

std::string format_word_poly(const WordPoly& p);

WordPoly iota(const TracePoly& q);
WordPoly iota_star(const TracePoly& q);
WordPoly sesq_B(const TracePoly& p, const TracePoly& q);

// The two contraction families.  plus: sum over an orthonormal basis of u_N;
// minus: over i times that basis.  derive_generators combines them with
// weights (s - t/2) and t/2.
struct FamilyPair {
    WordPoly plus;
    WordPoly minus;
    WordPoly combine(double s, double t) const;
};
const FamilyPair& q_families(const Word& eps);
const FamilyPair& r_families(const Word& eps, const Word& delta);

// Q_eps^{s,t} when delta is empty, R_{eps,delta}^{s,t} otherwise.
WordPoly derive_generators(const Word& eps, const std::optional<Word>& delta, double s, double t);

enum class TildeGen { Dst, Lst };
WordPoly apply_tilde(TildeGen gen, const WordPoly& p, double s, double t);

// (e^{D~ + L~/N^2} p) at v = 1
Coeff expectation(const WordPoly& p, double s, double t, int N, double tol = EXP_TOL);

struct Measure {
    enum Kind { rho, mu } kind = rho;
    double s = 1.0;
    double t = 0.0;  // ignored for rho
    int N = 1;

    static Measure Rho(double s, int N) { return {rho, s, 0.0, N}; }
    static Measure Mu(double s, double t, int N) { return {mu, s, t, N}; }
};
double l2_norm_sq(const TracePoly& p, const Measure& m, double tol = EXP_TOL);

}  // namespace freesb

#endif
