// rng.hpp — counter-based random streams keyed by (seed, stream index)

#pragma once

#include <cstdint>
#include <vector>

namespace ftparity {

// SplitMix64 finalizer applied to a (key, counter) pair. Each stream is an
// independent sequence, so trajectory i draws the same numbers regardless of
// which other trajectories run or in what order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in (0, 1].
    double uniform_pos() noexcept { return 1.0 - uniform(); }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Index drawn with probability proportional to weights (must have positive sum).
    int categorical(const std::vector<double>& weights) noexcept;
    /// Binomial(n, p) by sequential inversion.
    int binomial(int n, double p) noexcept;
    /// Multinomial(n, p) via sequential binomial conditioning; the remainder
    /// 1 − Σp is an implicit "nothing happened" category.
    std::vector<int> multinomial(int n, const std::vector<double>& p) noexcept;

    /// Derived stream for nested sampling (e.g. one per measurement inside a trial).
    CounterRng substream(std::uint64_t index) const noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace ftparity
