#ifndef FREESB_RNG_HPP
#define FREESB_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

#include "freesb/trace_poly.hpp"

namespace freesb {

inline constexpr const char* RNG_NAME = "philox4x32-10/box-muller v1";

// Counter-based generator (Salmon et al. Philox 4x32, 10 rounds).  The key is
// the master seed; the upper counter words hold the stream index, so every
// (seed, stream) pair is an independent, reproducible sequence.
class Philox {
public:
    using result_type = std::uint32_t;

    Philox(std::uint64_t seed, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    double uniform();  // in (0, 1)
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> out_{};
    int used_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;

    void refill();
};

// Random polynomial with `terms` monomials drawn from the basis of trace degree
// <= max_degree and complex coefficients with parts uniform in [-1, 1].
TracePoly random_trace_poly(Philox& rng, int max_degree, int terms, bool v_only = false, bool laurent_only = false);

}  // namespace freesb

#endif
