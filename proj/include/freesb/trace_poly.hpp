#ifndef FREESB_TRACE_POLY_HPP
#define FREESB_TRACE_POLY_HPP

#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace freesb {

using Coeff = std::complex<double>;

inline constexpr double CLEANUP_EPS = 1e-14;
inline constexpr double EQ_EPS = 1e-12;

// u^u_exp * prod_j v_j^e_j.  v is kept sorted by j with j != 0 and e_j >= 1.
struct TraceMono {
    int u_exp = 0;
    std::vector<std::pair<int, int>> v;

    TraceMono() = default;
    explicit TraceMono(int u, std::vector<std::pair<int, int>> vexps = {});

    int degree() const;
    int v_exp(int j) const;
    bool has_v() const { return !v.empty(); }
    TraceMono operator*(const TraceMono& o) const;

    // Ascending u_exp, then lexicographic on the (j, e_j) list.
    auto operator<=>(const TraceMono&) const = default;
    bool operator==(const TraceMono&) const = default;
};

class TracePoly {
public:
    using Terms = std::map<TraceMono, Coeff>;

    TracePoly() = default;
    TracePoly(Coeff c);  // NOLINT: constants convert implicitly
    TracePoly(double c) : TracePoly(Coeff(c)) {}

    static TracePoly monomial(const TraceMono& m, Coeff c = 1.0);
    static TracePoly u(int k = 1);
    static TracePoly v(int j, int e = 1);

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    Coeff coeff(const TraceMono& m) const;
    Coeff coeff_u(int k) const { return coeff(TraceMono(k)); }

    // Accumulate without pruning; call prune() when done.
    void accumulate(const TraceMono& m, Coeff c);
    TracePoly& prune();

    bool is_laurent() const;   // no v variables
    bool is_v_only() const;    // every u exponent is 0
    double max_abs() const;
    int min_u() const;
    int max_u() const;

    TracePoly& operator+=(const TracePoly& o);
    TracePoly& operator-=(const TracePoly& o);
    TracePoly& operator*=(Coeff c);

    friend TracePoly operator+(TracePoly a, const TracePoly& b) { return a += b; }
    friend TracePoly operator-(TracePoly a, const TracePoly& b) { return a -= b; }
    friend TracePoly operator*(const TracePoly& a, const TracePoly& b);
    friend TracePoly operator*(TracePoly a, Coeff c) { return a *= c; }
    friend TracePoly operator*(Coeff c, TracePoly a) { return a *= c; }
    friend TracePoly operator*(TracePoly a, double c) { return a *= Coeff(c); }
    friend TracePoly operator*(double c, TracePoly a) { return a *= Coeff(c); }
    friend TracePoly operator-(TracePoly a) { return a *= -1.0; }

    bool approx_equal(const TracePoly& o, double eps = EQ_EPS) const;
    friend bool operator==(const TracePoly& a, const TracePoly& b) { return a.approx_equal(b); }

private:
    Terms terms_;
};

enum class ArithOp { add, mul, scale, negate };
TracePoly arith(ArithOp op, const TracePoly& a, const TracePoly& b);

struct TraceDegree {
    int value = 0;
    bool zero = false;
};
TraceDegree trace_degree(const TracePoly& p);

TracePoly tracing_map(const TracePoly& p);

class MissingIndex : public std::invalid_argument {
public:
    explicit MissingIndex(int j);
    int index;
};
TracePoly substitute_v(const TracePoly& p, const std::map<int, Coeff>& assign);

TracePoly invert_u(const TracePoly& f);

// Numeric value of a Laurent polynomial at u.
Coeff eval_laurent(const TracePoly& f, Coeff u);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t pos);
    std::size_t position;
};
TracePoly parse_poly(std::string_view text);
std::string format_poly(const TracePoly& p);
std::string format_coeff(Coeff c);

// Every monomial of trace degree <= n, in canonical order.  With laurent_only
// the v part is empty; with v_only the u exponent is 0.
std::vector<TraceMono> monomial_basis(int n, bool laurent_only = false, bool v_only = false);

}  // namespace freesb

#endif
