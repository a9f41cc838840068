#include "freesb/word_poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace freesb {

// ---------------------------------------------------------------- words

namespace {

bool valid_letter(char c) { return c == 'a' || c == 'A' || c == 's' || c == 'S'; }

// a/A and s/S cancel; Z never cancels against Z*.
bool cancels(char x, char y) { return x != y && std::tolower(x) == std::tolower(y); }

constexpr std::size_t MAX_WORD = 2 * MAX_DEGREE;

}  // namespace

Word canonicalize(std::string_view raw) {
    std::string st;
    st.reserve(raw.size());
    for (char c : raw) {
        if (!valid_letter(c)) throw std::invalid_argument(std::string("bad word letter '") + c + "'");
        if (!st.empty() && cancels(st.back(), c))
            st.pop_back();
        else
            st.push_back(c);
    }
    std::size_t lo = 0, hi = st.size();
    while (hi - lo >= 2 && cancels(st[lo], st[hi - 1])) {
        ++lo;
        --hi;
    }
    std::string w = st.substr(lo, hi - lo);
    std::string best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::string rot = w.substr(r) + w.substr(0, r);
        if (rot < best) best = std::move(rot);
    }
    return Word{std::move(best)};
}

Word canonicalize(const std::vector<Letter>& raw) {
    std::string s;
    for (Letter l : raw) s.push_back(static_cast<char>(l));
    return canonicalize(s);
}

Word parse_word(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    return canonicalize(s);
}

std::string format_word(const Word& w) { return w.letters; }

Word eps_word(int j, int k) {
    std::string s;
    s.append(static_cast<std::size_t>(std::abs(j)), j >= 0 ? 'a' : 'A');
    s.append(static_cast<std::size_t>(std::abs(k)), k >= 0 ? 's' : 'S');
    return canonicalize(s);
}

// ---------------------------------------------------------------- monomials

WordMono::WordMono(std::vector<std::pair<Word, int>> f) {
    std::sort(f.begin(), f.end());
    for (auto& [w, e] : f) {
        if (e < 0) throw std::invalid_argument("negative word exponent");
        if (e == 0 || w.empty()) continue;
        if (!factors.empty() && factors.back().first == w)
            factors.back().second += e;
        else
            factors.emplace_back(std::move(w), e);
    }
}

WordMono WordMono::of(const Word& w) { return WordMono({{w, 1}}); }

int WordMono::degree() const {
    int d = 0;
    for (const auto& [w, e] : factors) d += static_cast<int>(w.size()) * e;
    return d;
}

int WordMono::exponent(const Word& w) const {
    for (const auto& [x, e] : factors)
        if (x == w) return e;
    return 0;
}

WordMono WordMono::operator*(const WordMono& o) const {
    WordMono r;
    r.factors.reserve(factors.size() + o.factors.size());
    auto a = factors.begin(), b = o.factors.begin();
    while (a != factors.end() || b != o.factors.end()) {
        if (b == o.factors.end() || (a != factors.end() && a->first < b->first))
            r.factors.push_back(*a++);
        else if (a == factors.end() || b->first < a->first)
            r.factors.push_back(*b++);
        else {
            r.factors.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    return r;
}

namespace {

WordMono drop_factor(const WordMono& m, std::size_t idx, int times) {
    WordMono r = m;
    r.factors[idx].second -= times;
    if (r.factors[idx].second == 0) r.factors.erase(r.factors.begin() + static_cast<std::ptrdiff_t>(idx));
    return r;
}

}  // namespace

// ---------------------------------------------------------------- polynomials

WordPoly::WordPoly(Coeff c) {
    if (std::abs(c) >= CLEANUP_EPS) terms_.emplace(WordMono(), c);
}

WordPoly WordPoly::monomial(const WordMono& m, Coeff c) {
    WordPoly p;
    if (std::abs(c) >= CLEANUP_EPS) p.terms_.emplace(m, c);
    return p;
}

WordPoly WordPoly::var(const Word& w, Coeff c) { return monomial(WordMono::of(w), c); }

Coeff WordPoly::coeff(const WordMono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff(0.0) : it->second;
}

void WordPoly::accumulate(const WordMono& m, Coeff c) {
    if (c == Coeff(0.0)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) it->second += c;
}

WordPoly& WordPoly::prune() {
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < CLEANUP_EPS; });
    return *this;
}

double WordPoly::max_abs() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

int WordPoly::degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

bool WordPoly::homogeneous(int d) const {
    return std::all_of(terms_.begin(), terms_.end(), [d](const auto& kv) { return kv.first.degree() == d; });
}

Coeff WordPoly::at_ones() const {
    Coeff s = 0.0;
    for (const auto& [m, c] : terms_) s += c;
    return s;
}

WordPoly& WordPoly::operator+=(const WordPoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, c);
    return prune();
}

WordPoly& WordPoly::operator-=(const WordPoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, -c);
    return prune();
}

WordPoly& WordPoly::operator*=(Coeff c) {
    for (auto& [m, x] : terms_) x *= c;
    return prune();
}

WordPoly operator*(const WordPoly& a, const WordPoly& b) {
    WordPoly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) r.accumulate(ma * mb, ca * cb);
    return r.prune();
}

bool WordPoly::approx_equal(const WordPoly& o, double eps) const {
    const double allowed = eps * std::max(max_abs(), o.max_abs());
    WordPoly d = *this;
    for (const auto& [m, c] : o.terms_) d.accumulate(m, -c);
    for (const auto& [m, c] : d.terms_)
        if (std::abs(c) > allowed) return false;
    return true;
}

std::string format_word_poly(const WordPoly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        if (!first) os << " + ";
        first = false;
        os << format_coeff(c);
        for (const auto& [w, e] : m.factors) {
            os << "*v[" << w.letters << "]";
            if (e > 1) os << "^" << e;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- inclusions

namespace {

WordPoly include_v(const TracePoly& q, bool star) {
    WordPoly r;
    for (const auto& [m, c] : q.terms()) {
        if (m.u_exp != 0) throw std::invalid_argument("iota: argument must lie in C[v]");
        std::vector<std::pair<Word, int>> f;
        for (auto [j, e] : m.v) f.emplace_back(star ? eps_word(0, j) : eps_word(j, 0), e);
        r.accumulate(WordMono(std::move(f)), star ? std::conj(c) : c);
    }
    return r.prune();
}

}  // namespace

WordPoly iota(const TracePoly& q) { return include_v(q, false); }
WordPoly iota_star(const TracePoly& q) { return include_v(q, true); }

WordPoly sesq_B(const TracePoly& p, const TracePoly& q) {
    WordPoly r;
    for (const auto& [mp, cp] : p.terms()) {
        TraceMono vp = mp;
        vp.u_exp = 0;
        WordPoly ip = iota(TracePoly::monomial(vp));
        for (const auto& [mq, cq] : q.terms()) {
            TraceMono vq = mq;
            vq.u_exp = 0;
            WordPoly iq = iota_star(TracePoly::monomial(vq));
            WordPoly term = WordPoly::var(eps_word(mp.u_exp, mq.u_exp)) * ip * iq;
            for (const auto& [m, c] : term.terms()) r.accumulate(m, cp * std::conj(cq) * c);
        }
    }
    return r.prune();
}

// ---------------------------------------------------------------- generators

namespace {

// Where the derivative letter xi lands for each letter of a word, as a gap
// index (gap g sits after the first g letters) and a sign.  sigma is the sign
// in xi* = sigma xi for the family being summed.
struct Slot {
    std::size_t gap;
    int sign;
};

Slot slot(char letter, std::size_t i, int sigma) {
    switch (letter) {
        case 'a': return {i + 1, 1};        // Z -> Z xi
        case 'A': return {i, -1};           // Z^-1 -> -xi Z^-1
        case 's': return {i, sigma};        // Z* -> xi* Z*
        default: return {i + 1, -sigma};    // Z*^-1 -> -Z*^-1 xi*
    }
}

WordPoly var_or_one(const std::string& raw) { return WordPoly::var(canonicalize(raw)); }

// kappa is the sign in sum xi^2 = kappa I (and of the two trace contractions).
WordPoly q_family(const Word& eps, int kappa) {
    const std::string& L = eps.letters;
    const std::size_t n = L.size();
    WordPoly acc = WordPoly::var(eps, double(n) * kappa);
    const int sigma = kappa;
    for (std::size_t i = 0; i < n; ++i) {
        Slot a = slot(L[i], i, sigma);
        for (std::size_t j = i + 1; j < n; ++j) {
            Slot b = slot(L[j], j, sigma);
            std::string inner = L.substr(a.gap, b.gap - a.gap);
            std::string outer = L.substr(b.gap) + L.substr(0, a.gap);
            acc += var_or_one(outer) * var_or_one(inner) * Coeff(2.0 * kappa * a.sign * b.sign);
        }
    }
    return acc;
}

WordPoly r_family(const Word& eps, const Word& delta, int kappa) {
    const std::string& E = eps.letters;
    const std::string& D = delta.letters;
    const int sigma = kappa;
    WordPoly acc;
    for (std::size_t i = 0; i < E.size(); ++i) {
        Slot a = slot(E[i], i, sigma);
        std::string re = E.substr(a.gap) + E.substr(0, a.gap);
        for (std::size_t j = 0; j < D.size(); ++j) {
            Slot b = slot(D[j], j, sigma);
            std::string rd = D.substr(b.gap) + D.substr(0, b.gap);
            acc.accumulate(WordMono::of(canonicalize(re + rd)), Coeff(double(kappa * a.sign * b.sign)));
        }
    }
    return acc.prune();
}

// Shared memo of derived generators.  Entries are deterministic, so a racing
// duplicate insert is harmless.
class GeneratorTable {
public:
    const FamilyPair& q(const Word& eps) { return get(eps.letters, [&] { return make_q(eps); }); }
    const FamilyPair& r(const Word& eps, const Word& delta) {
        const Word& a = std::min(eps, delta);
        const Word& b = std::max(eps, delta);
        return get(a.letters + "|" + b.letters, [&] { return make_r(a, b); });
    }

private:
    std::shared_mutex mu_;
    std::unordered_map<std::string, FamilyPair> table_;

    template <class Make>
    const FamilyPair& get(const std::string& key, Make&& make) {
        {
            std::shared_lock lock(mu_);
            auto it = table_.find(key);
            if (it != table_.end()) return it->second;
        }
        FamilyPair value = make();
        std::unique_lock lock(mu_);
        return table_.try_emplace(key, std::move(value)).first->second;
    }

    static void check(const Word& w) {
        if (w.size() > MAX_WORD) throw std::length_error("word longer than the generator cap");
    }
    static FamilyPair make_q(const Word& eps) {
        check(eps);
        return {q_family(eps, -1), q_family(eps, +1)};
    }
    static FamilyPair make_r(const Word& eps, const Word& delta) {
        check(eps);
        check(delta);
        return {r_family(eps, delta, -1), r_family(eps, delta, +1)};
    }
};

GeneratorTable& table() {
    static GeneratorTable t;
    return t;
}

// Combined coefficients for one (s, t, N) evaluation, with the factor 1/2 of
// D~ and L~ and the 1/N^2 of L~ folded in.
class TildeGenerator {
public:
    TildeGenerator(double s, double t, double q_weight, double r_weight)
        : s_(s), t_(t), qw_(q_weight), rw_(r_weight) {}

    WordPoly apply(const WordPoly& p) {
        WordPoly out;
        for (const auto& [m, c] : p.terms()) {
            const auto& f = m.factors;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const int ei = f[i].second;
                if (qw_ != 0.0) {
                    WordMono rest = drop_factor(m, i, 1);
                    for (const auto& [qm, qc] : Q(f[i].first).terms()) out.accumulate(rest * qm, c * double(ei) * qc);
                }
                if (rw_ == 0.0) continue;
                if (ei >= 2) {
                    WordMono rest = drop_factor(m, i, 2);
                    for (const auto& [rm, rc] : R(f[i].first, f[i].first).terms())
                        out.accumulate(rest * rm, c * double(ei * (ei - 1)) * rc);
                }
                for (std::size_t j = i + 1; j < f.size(); ++j) {
                    const int ej = f[j].second;
                    WordMono rest = drop_factor(drop_factor(m, j, 1), i, 1);
                    for (const auto& [rm, rc] : R(f[i].first, f[j].first).terms())
                        out.accumulate(rest * rm, c * (2.0 * ei * ej) * rc);
                }
            }
        }
        return out.prune();
    }

private:
    double s_, t_, qw_, rw_;
    std::map<std::string, WordPoly> q_;
    std::map<std::string, WordPoly> r_;

    const WordPoly& Q(const Word& w) {
        auto it = q_.find(w.letters);
        if (it != q_.end()) return it->second;
        return q_.emplace(w.letters, table().q(w).combine(s_, t_) * Coeff(qw_)).first->second;
    }
    const WordPoly& R(const Word& a, const Word& b) {
        std::string key = std::min(a, b).letters + "|" + std::max(a, b).letters;
        auto it = r_.find(key);
        if (it != r_.end()) return it->second;
        return r_.emplace(key, table().r(a, b).combine(s_, t_) * Coeff(rw_)).first->second;
    }
};

}  // namespace

WordPoly FamilyPair::combine(double s, double t) const { return plus * Coeff(s - t / 2.0) + minus * Coeff(t / 2.0); }

const FamilyPair& q_families(const Word& eps) { return table().q(eps); }
const FamilyPair& r_families(const Word& eps, const Word& delta) { return table().r(eps, delta); }

WordPoly derive_generators(const Word& eps, const std::optional<Word>& delta, double s, double t) {
    if (delta) return r_families(eps, *delta).combine(s, t);
    return q_families(eps).combine(s, t);
}

WordPoly apply_tilde(TildeGen gen, const WordPoly& p, double s, double t) {
    TildeGenerator g(s, t, gen == TildeGen::Dst ? 0.5 : 0.0, gen == TildeGen::Lst ? 0.5 : 0.0);
    return g.apply(p);
}

Coeff expectation(const WordPoly& p, double s, double t, int N, double tol) {
    if (N < 1) throw std::invalid_argument("expectation: N must be >= 1");
    TildeGenerator g(s, t, 0.5, 0.5 / (double(N) * double(N)));
    WordPoly r = taylor_exp<WordPoly>([&g](const WordPoly& x) { return g.apply(x); }, 1.0, p, tol,
                                      [](const WordPoly& x) { return x.max_abs(); });
    return r.at_ones();
}

double l2_norm_sq(const TracePoly& p, const Measure& m, double tol) {
    const double t = m.kind == Measure::rho ? 0.0 : m.t;
    Coeff e = expectation(sesq_B(p, p), m.s, t, m.N, tol);
    double v = e.real();
    if (v < -1e-10) throw std::runtime_error("l2_norm_sq: negative norm, generator tables are inconsistent");
    return std::max(v, 0.0);
}

}  // namespace freesb
