#include "freesb/operators.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

namespace freesb {

namespace {

// m / v_j, assuming v_j divides m
TraceMono drop_v(const TraceMono& m, int j, int times = 1) {
    TraceMono r = m;
    for (auto it = r.v.begin(); it != r.v.end(); ++it) {
        if (it->first == j) {
            it->second -= times;
            if (it->second == 0) r.v.erase(it);
            return r;
        }
    }
    throw std::logic_error("drop_v: variable not present");
}

TraceMono times_v(const TraceMono& m, int j) {
    if (j == 0) return m;
    return m * TraceMono(0, {{j, 1}});
}

TraceMono times_u(const TraceMono& m, int k) {
    TraceMono r = m;
    r.u_exp += k;
    return r;
}

template <class F>
TracePoly map_terms(const TracePoly& p, F&& f) {
    TracePoly out;
    for (const auto& [m, c] : p.terms()) f(m, c, out);
    return out.prune();
}

void add_N0(const TraceMono& m, Coeff c, TracePoly& out) {
    int d = 0;
    for (auto [j, e] : m.v) d += std::abs(j) * e;
    out.accumulate(m, c * double(d));
}

void add_N1(const TraceMono& m, Coeff c, TracePoly& out) {
    out.accumulate(m, c * double(std::abs(m.u_exp)));
}

void add_Y(const TraceMono& m, Coeff c, TracePoly& out) {
    const int n = m.u_exp;
    TraceMono q = m;
    q.u_exp = 0;
    if (n >= 2) {
        for (int k = 1; k <= n - 1; ++k) out.accumulate(times_u(times_v(q, k), n - k), c * double(n - k));
    } else if (n <= -2) {
        for (int k = n + 1; k <= -1; ++k) out.accumulate(times_u(times_v(q, k), n - k), -c * double(n - k));
    }
}

// Derivation on C[v]; v_{+-1} are killed.
void add_Z(const TraceMono& m, Coeff c, TracePoly& out) {
    for (auto [k, e] : m.v) {
        if (std::abs(k) < 2) continue;
        TraceMono rest = drop_v(m, k);
        Coeff ce = c * double(e);
        if (k >= 2) {
            for (int j = 1; j <= k - 1; ++j) out.accumulate(times_v(times_v(rest, j), k - j), ce * double(j));
        } else {
            for (int j = k + 1; j <= -1; ++j) out.accumulate(times_v(times_v(rest, j), k - j), -ce * double(j));
        }
    }
}

void add_L(const TraceMono& m, Coeff c, TracePoly& out) {
    const int n = m.u_exp;
    for (auto [j, ej] : m.v) {
        for (auto [k, ek] : m.v) {
            if (j == k) {
                if (ej < 2) continue;
                out.accumulate(times_v(drop_v(m, j, 2), j + k), c * double(j) * double(k) * double(ej * (ej - 1)));
            } else {
                TraceMono r = drop_v(drop_v(m, j), k);
                out.accumulate(times_v(r, j + k), c * double(j) * double(k) * double(ej * ek));
            }
        }
        if (n != 0) out.accumulate(times_u(drop_v(m, j), j), c * 2.0 * double(n) * double(j) * double(ej));
    }
}

}  // namespace

TracePoly apply_named(OpName name, const TracePoly& p, std::optional<int> k) {
    switch (name) {
        case OpName::N0: return map_terms(p, add_N0);
        case OpName::N1: return map_terms(p, add_N1);
        case OpName::Y: return map_terms(p, add_Y);
        case OpName::Z: return map_terms(p, add_Z);
        case OpName::L: return map_terms(p, add_L);
        case OpName::Aplus:
            return map_terms(p, [](const TraceMono& m, Coeff c, TracePoly& o) {
                if (m.u_exp >= 0) o.accumulate(m, c);
            });
        case OpName::Aminus:
            return map_terms(p, [](const TraceMono& m, Coeff c, TracePoly& o) {
                if (m.u_exp < 0) o.accumulate(m, c);
            });
        case OpName::sgn:
            return map_terms(p, [](const TraceMono& m, Coeff c, TracePoly& o) {
                o.accumulate(m, m.u_exp < 0 ? -c : c);
            });
        case OpName::Mu: {
            if (!k) throw std::invalid_argument("Mu needs a power of u");
            const int kk = *k;
            return map_terms(p, [kk](const TraceMono& m, Coeff c, TracePoly& o) { o.accumulate(times_u(m, kk), c); });
        }
    }
    return {};
}

TracePoly apply_D(const TracePoly& p) {
    return map_terms(p, [](const TraceMono& m, Coeff c, TracePoly& o) {
        add_N0(m, -c, o);
        add_N1(m, -c, o);
        add_Z(m, -2.0 * c, o);
        add_Y(m, -2.0 * c, o);
    });
}

TracePoly apply_DN(const TracePoly& p, int N) {
    if (N < 1) throw std::invalid_argument("apply_DN: N must be >= 1");
    const double w = -1.0 / (double(N) * double(N));
    return map_terms(p, [w](const TraceMono& m, Coeff c, TracePoly& o) {
        add_N0(m, -c, o);
        add_N1(m, -c, o);
        add_Z(m, -2.0 * c, o);
        add_Y(m, -2.0 * c, o);
        add_L(m, w * c, o);
    });
}

GeneratorSpec GeneratorSpec::DN(int N) {
    if (N < 1) throw std::invalid_argument("D_N: N must be >= 1");
    return {{{GenName::D, 1.0}, {GenName::L, -1.0 / (double(N) * double(N))}}};
}

TracePoly GeneratorSpec::apply(const TracePoly& p) const {
    return map_terms(p, [this](const TraceMono& m, Coeff c, TracePoly& o) {
        for (auto [name, w] : terms) {
            Coeff cw = c * w;
            switch (name) {
                case GenName::D:
                    add_N0(m, -cw, o);
                    add_N1(m, -cw, o);
                    add_Z(m, -2.0 * cw, o);
                    add_Y(m, -2.0 * cw, o);
                    break;
                case GenName::L: add_L(m, cw, o); break;
                case GenName::N0: add_N0(m, cw, o); break;
                case GenName::N1: add_N1(m, cw, o); break;
                case GenName::Y: add_Y(m, cw, o); break;
                case GenName::Z: add_Z(m, cw, o); break;
                case GenName::PI_GEN:
                    add_N0(m, cw, o);
                    add_Z(m, 2.0 * cw, o);
                    break;
            }
        }
    });
}

TracePoly exp_apply(const GeneratorSpec& gen, double theta, const TracePoly& p, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("exp_apply: tol must be positive");
    if (theta == 0.0) return p;
    return taylor_exp<TracePoly>([&gen](const TracePoly& x) { return gen.apply(x); }, theta, p, tol,
                                 [](const TracePoly& x) { return x.max_abs(); });
}

std::ptrdiff_t OperatorMatrix::index_of(const TraceMono& m) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), m);
    if (it == basis.end() || !(*it == m)) return -1;
    return it - basis.begin();
}

Eigen::VectorXcd OperatorMatrix::coords(const TracePoly& p) const {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (const auto& [m, c] : p.terms()) {
        auto i = index_of(m);
        if (i < 0) throw std::out_of_range("coords: monomial outside the basis");
        x[i] = c;
    }
    return x;
}

TracePoly OperatorMatrix::from_coords(const Eigen::VectorXcd& x) const {
    TracePoly p;
    for (std::size_t i = 0; i < basis.size(); ++i) p.accumulate(basis[i], x[static_cast<Eigen::Index>(i)]);
    return p.prune();
}

CMatrix OperatorMatrix::restrict_to(const std::vector<TraceMono>& sub) const {
    std::vector<std::ptrdiff_t> idx;
    for (const auto& m : sub) {
        auto i = index_of(m);
        if (i < 0) throw std::out_of_range("restrict_to: monomial outside the basis");
        idx.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    CMatrix r(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) r(a, b) = entries(idx[a], idx[b]);
    return r;
}

OperatorMatrix operator_matrix(const GeneratorSpec& gen, int n) {
    if (n < 0 || n > MAX_DEGREE) throw std::invalid_argument("operator_matrix: degree outside [0, MAX_DEGREE]");
    OperatorMatrix M;
    M.n = n;
    M.basis = monomial_basis(n);
    if (M.basis.size() > BASIS_CAP) throw std::length_error("operator_matrix: basis exceeds BASIS_CAP");
    const auto dim = static_cast<Eigen::Index>(M.basis.size());
    M.entries = CMatrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        TracePoly img = gen.apply(TracePoly::monomial(M.basis[static_cast<std::size_t>(j)]));
        for (const auto& [m, c] : img.terms()) {
            auto i = M.index_of(m);
            if (i < 0) throw std::logic_error("operator_matrix: image left the degree filtration");
            M.entries(i, j) = c;
        }
    }
    return M;
}

}  // namespace freesb
