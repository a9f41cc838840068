#include "freesb/rng.hpp"

#include <cmath>
#include <numbers>

namespace freesb {

namespace {

constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = std::uint64_t(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      ctr_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

void Philox::refill() {
    std::array<std::uint32_t, 4> x = ctr_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(M0, x[0], hi0, lo0);
        mulhilo(M1, x[2], hi1, lo1);
        x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
        k[0] += W0;
        k[1] += W1;
    }
    out_ = x;
    used_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1];
}

Philox::result_type Philox::operator()() {
    if (used_ == 4) refill();
    return out_[static_cast<std::size_t>(used_++)];
}

double Philox::uniform() {
    std::uint64_t hi = (*this)(), lo = (*this)();
    std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
    return (double(bits) + 0.5) * 0x1.0p-53;
}

double Philox::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform()));
    double th = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
}

TracePoly random_trace_poly(Philox& rng, int max_degree, int terms, bool v_only, bool laurent_only) {
    auto basis = monomial_basis(max_degree, laurent_only, v_only);
    TracePoly p;
    for (int i = 0; i < terms; ++i) {
        const auto& m = basis[static_cast<std::size_t>(rng() % basis.size())];
        p.accumulate(m, Coeff(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0));
    }
    return p.prune();
}

}  // namespace freesb
