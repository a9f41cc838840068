#include "freesb/trace_poly.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace freesb {

TraceMono::TraceMono(int u, std::vector<std::pair<int, int>> vexps) : u_exp(u), v(std::move(vexps)) {
    std::sort(v.begin(), v.end());
    std::vector<std::pair<int, int>> merged;
    for (auto [j, e] : v) {
        if (j == 0) throw std::invalid_argument("v_0 is not a variable");
        if (e < 0) throw std::invalid_argument("negative v exponent");
        if (e == 0) continue;
        if (!merged.empty() && merged.back().first == j)
            merged.back().second += e;
        else
            merged.emplace_back(j, e);
    }
    v = std::move(merged);
}

int TraceMono::degree() const {
    int d = std::abs(u_exp);
    for (auto [j, e] : v) d += std::abs(j) * e;
    return d;
}

int TraceMono::v_exp(int j) const {
    auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(j, 0));
    return (it != v.end() && it->first == j) ? it->second : 0;
}

TraceMono TraceMono::operator*(const TraceMono& o) const {
    TraceMono r;
    r.u_exp = u_exp + o.u_exp;
    r.v.reserve(v.size() + o.v.size());
    auto a = v.begin(), b = o.v.begin();
    while (a != v.end() || b != o.v.end()) {
        if (b == o.v.end() || (a != v.end() && a->first < b->first))
            r.v.push_back(*a++);
        else if (a == v.end() || b->first < a->first)
            r.v.push_back(*b++);
        else {
            r.v.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    return r;
}

TracePoly::TracePoly(Coeff c) {
    if (std::abs(c) >= CLEANUP_EPS) terms_.emplace(TraceMono(), c);
}

TracePoly TracePoly::monomial(const TraceMono& m, Coeff c) {
    TracePoly p;
    if (std::abs(c) >= CLEANUP_EPS) p.terms_.emplace(m, c);
    return p;
}

TracePoly TracePoly::u(int k) { return monomial(TraceMono(k)); }

TracePoly TracePoly::v(int j, int e) { return monomial(TraceMono(0, {{j, e}})); }

Coeff TracePoly::coeff(const TraceMono& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Coeff(0.0) : it->second;
}

void TracePoly::accumulate(const TraceMono& m, Coeff c) {
    if (c == Coeff(0.0)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) it->second += c;
}

TracePoly& TracePoly::prune() {
    std::erase_if(terms_, [](const auto& kv) { return std::abs(kv.second) < CLEANUP_EPS; });
    return *this;
}

bool TracePoly::is_laurent() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return !kv.first.has_v(); });
}

bool TracePoly::is_v_only() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.first.u_exp == 0; });
}

double TracePoly::max_abs() const {
    double m = 0.0;
    for (const auto& [mono, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

int TracePoly::min_u() const {
    int m = 0;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
        m = first ? mono.u_exp : std::min(m, mono.u_exp);
        first = false;
    }
    return m;
}

int TracePoly::max_u() const {
    int m = 0;
    bool first = true;
    for (const auto& [mono, c] : terms_) {
        m = first ? mono.u_exp : std::max(m, mono.u_exp);
        first = false;
    }
    return m;
}

TracePoly& TracePoly::operator+=(const TracePoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, c);
    return prune();
}

TracePoly& TracePoly::operator-=(const TracePoly& o) {
    for (const auto& [m, c] : o.terms_) accumulate(m, -c);
    return prune();
}

TracePoly& TracePoly::operator*=(Coeff c) {
    for (auto& [m, x] : terms_) x *= c;
    return prune();
}

TracePoly operator*(const TracePoly& a, const TracePoly& b) {
    TracePoly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) r.accumulate(ma * mb, ca * cb);
    return r.prune();
}

// Coefficientwise comparison relative to the larger of the two polynomials.
bool TracePoly::approx_equal(const TracePoly& o, double eps) const {
    const double scale = std::max(max_abs(), o.max_abs());
    const double allowed = eps * scale;
    auto a = terms_.begin(), b = o.terms_.begin();
    while (a != terms_.end() || b != o.terms_.end()) {
        Coeff diff;
        if (b == o.terms_.end() || (a != terms_.end() && a->first < b->first))
            diff = (a++)->second;
        else if (a == terms_.end() || b->first < a->first)
            diff = (b++)->second;
        else
            diff = (a++)->second - (b++)->second;
        if (std::abs(diff) > allowed) return false;
    }
    return true;
}

TracePoly arith(ArithOp op, const TracePoly& a, const TracePoly& b) {
    switch (op) {
        case ArithOp::add: return a + b;
        case ArithOp::mul: return a * b;
        case ArithOp::scale: {
            if (!b.is_zero() && (b.size() != 1 || b.terms().begin()->first != TraceMono()))
                throw std::invalid_argument("scale expects a constant");
            return a * b.coeff(TraceMono());
        }
        case ArithOp::negate: return -a;
    }
    return a;
}

TraceDegree trace_degree(const TracePoly& p) {
    if (p.is_zero()) return {0, true};
    int d = 0;
    for (const auto& [m, c] : p.terms()) d = std::max(d, m.degree());
    return {d, false};
}

TracePoly tracing_map(const TracePoly& p) {
    TracePoly r;
    for (const auto& [m, c] : p.terms()) {
        if (m.u_exp == 0) {
            r.accumulate(m, c);
        } else {
            TraceMono vk(0, {{m.u_exp, 1}});
            TraceMono rest = m;
            rest.u_exp = 0;
            r.accumulate(vk * rest, c);
        }
    }
    return r.prune();
}

MissingIndex::MissingIndex(int j)
    : std::invalid_argument("substitute_v: no value assigned to v" + std::to_string(j)), index(j) {}

TracePoly substitute_v(const TracePoly& p, const std::map<int, Coeff>& assign) {
    TracePoly r;
    for (const auto& [m, c] : p.terms()) {
        Coeff x = c;
        for (auto [j, e] : m.v) {
            auto it = assign.find(j);
            if (it == assign.end()) throw MissingIndex(j);
            x *= std::pow(it->second, e);
        }
        r.accumulate(TraceMono(m.u_exp), x);
    }
    return r.prune();
}

TracePoly invert_u(const TracePoly& f) {
    if (!f.is_laurent()) throw std::invalid_argument("invert_u: argument contains v variables");
    TracePoly r;
    for (const auto& [m, c] : f.terms()) r.accumulate(TraceMono(-m.u_exp), c);
    return r.prune();
}

Coeff eval_laurent(const TracePoly& f, Coeff u) {
    if (!f.is_laurent()) throw std::invalid_argument("eval_laurent: argument contains v variables");
    Coeff r = 0.0;
    for (const auto& [m, c] : f.terms()) r += c * std::pow(u, m.u_exp);
    return r;
}

// ---------------------------------------------------------------- text I/O

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}

namespace {

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    TracePoly polynomial() {
        TracePoly out;
        skip();
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') {
            sign = get() == '-' ? -1.0 : 1.0;
        }
        out += sign * term();
        while (true) {
            skip();
            if (at_end()) break;
            char op = peek();
            if (op != '+' && op != '-') fail("expected '+' or '-'");
            ++i_;
            out += (op == '-' ? -1.0 : 1.0) * term();
        }
        return out;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, i_); }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool at_end() {
        skip();
        return i_ >= s_.size();
    }
    char peek() {
        skip();
        return i_ < s_.size() ? s_[i_] : '\0';
    }
    char get() {
        char c = peek();
        ++i_;
        return c;
    }

    double number() {
        skip();
        const char* begin = s_.data() + i_;
        std::string buf(begin, s_.size() - i_);
        char* end = nullptr;
        double x = std::strtod(buf.c_str(), &end);
        if (end == buf.c_str()) fail("expected a number");
        i_ += static_cast<std::size_t>(end - buf.c_str());
        return x;
    }

    long integer(bool allow_sign) {
        skip();
        bool neg = false;
        if (allow_sign && (peek() == '-' || peek() == '+')) {
            neg = get() == '-';
            skip();
        }
        if (i_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[i_]))) fail("expected an integer");
        long x = 0;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            x = x * 10 + (s_[i_++] - '0');
            if (x > 1000000) fail("integer too large");
        }
        return neg ? -x : x;
    }

    TracePoly term() {
        Coeff c = 1.0;
        bool any = false;
        char ch = peek();
        if (ch == '(') {
            ++i_;
            double re = number();
            char op = get();
            if (op != '+' && op != '-') fail("expected '+' or '-' in complex coefficient");
            double im = number();
            if (get() != 'i') fail("expected 'i'");
            if (get() != ')') fail("expected ')'");
            c = Coeff(re, op == '-' ? -im : im);
            any = true;
        } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            c = number();
            any = true;
        }
        TraceMono m;
        while (true) {
            ch = peek();
            if (ch == '*') {
                ++i_;
                ch = peek();
                if (ch != 'u' && ch != 'v') fail("expected a factor after '*'");
            }
            if (ch == 'u') {
                ++i_;
                int k = 1;
                if (peek() == '^') {
                    ++i_;
                    k = static_cast<int>(integer(true));
                }
                m = m * TraceMono(k);
            } else if (ch == 'v') {
                ++i_;
                int j = static_cast<int>(integer(true));
                if (j == 0) fail("v0 is not a variable");
                int e = 1;
                if (peek() == '^') {
                    ++i_;
                    e = static_cast<int>(integer(false));
                    if (e < 1) fail("exponent must be positive");
                }
                m = m * TraceMono(0, {{j, e}});
            } else {
                break;
            }
            any = true;
        }
        if (!any) fail("expected a term");
        return TracePoly::monomial(m, c);
    }
};

std::string real_str(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string mono_str(const TraceMono& m) {
    std::string out;
    auto add = [&](const std::string& f) {
        if (!out.empty()) out += "*";
        out += f;
    };
    if (m.u_exp == 1)
        add("u");
    else if (m.u_exp != 0)
        add("u^" + std::to_string(m.u_exp));
    for (auto [j, e] : m.v) add("v" + std::to_string(j) + (e > 1 ? "^" + std::to_string(e) : ""));
    return out;
}

}  // namespace

TracePoly parse_poly(std::string_view text) {
    Parser p(text);
    return p.polynomial();
}

std::string format_coeff(Coeff c) {
    if (c.imag() == 0.0) return real_str(c.real());
    std::string im = real_str(std::abs(c.imag()));
    return "(" + real_str(c.real()) + (c.imag() < 0 ? "-" : "+") + im + "i)";
}

std::string format_poly(const TracePoly& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
        std::string ms = mono_str(m);
        Coeff cc = c;
        bool negative = cc.imag() == 0.0 && cc.real() < 0.0;
        if (negative) cc = -cc;
        if (first)
            out += negative ? "-" : "";
        else
            out += negative ? " - " : " + ";
        first = false;
        if (ms.empty())
            out += format_coeff(cc);
        else if (cc == Coeff(1.0))
            out += ms;
        else
            out += format_coeff(cc) + "*" + ms;
    }
    return out;
}

// ---------------------------------------------------------------- bases

namespace {

// Multisets of nonzero indices with sum |j| e_j == d, each built with indices
// of magnitude <= maxabs, appended in increasing |j| order.
void v_parts(int d, int maxabs, std::vector<std::pair<int, int>>& cur,
             std::vector<std::vector<std::pair<int, int>>>& out) {
    if (d == 0) {
        out.push_back(cur);
        return;
    }
    for (int a = std::min(d, maxabs); a >= 1; --a) {
        // choose exponents for +a and -a together, total count c >= 1
        for (int cnt = 1; cnt * a <= d; ++cnt) {
            for (int ep = 0; ep <= cnt; ++ep) {
                int em = cnt - ep;
                std::size_t mark = cur.size();
                if (em) cur.emplace_back(-a, em);
                if (ep) cur.emplace_back(a, ep);
                v_parts(d - cnt * a, a - 1, cur, out);
                cur.resize(mark);
            }
        }
    }
}

}  // namespace

std::vector<TraceMono> monomial_basis(int n, bool laurent_only, bool v_only) {
    std::vector<TraceMono> out;
    for (int d = 0; d <= n; ++d) {
        std::vector<std::vector<std::pair<int, int>>> parts;
        std::vector<std::pair<int, int>> cur;
        if (laurent_only) {
            if (d == 0) parts.emplace_back();
        } else {
            v_parts(d, d, cur, parts);
        }
        int umax = v_only ? 0 : n - d;
        for (const auto& vp : parts)
            for (int k = -umax; k <= umax; ++k) out.emplace_back(k, vp);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace freesb
