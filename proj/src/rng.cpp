#include "ftparity/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ftparity {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) {}

std::uint64_t CounterRng::next_u64() noexcept {
    return mix64(key_ ^ mix64(counter_++));
}

double CounterRng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int CounterRng::categorical(const std::vector<double>& weights) noexcept {
    double total = 0.0;
    for (double w : weights) total += w;
    const double r = uniform() * total;
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last = static_cast<int>(i);
        if (r < acc) return last;
    }
    return last;
}

int CounterRng::binomial(int n, double p) noexcept {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    // inversion on the CDF; fine for the small n used by the kick model
    const double q = 1.0 - p;
    const double u = uniform();
    double pk = std::pow(q, n);
    double cdf = pk;
    int k = 0;
    while (u >= cdf && k < n) {
        pk *= (static_cast<double>(n - k) / (k + 1)) * (p / q);
        ++k;
        cdf += pk;
    }
    return k;
}

std::vector<int> CounterRng::multinomial(int n, const std::vector<double>& p) noexcept {
    std::vector<int> counts(p.size(), 0);
    int remaining = n;
    double mass = 1.0;
    for (std::size_t i = 0; i < p.size() && remaining > 0; ++i) {
        if (mass <= 0.0) break;
        const double pi = std::clamp(p[i] / mass, 0.0, 1.0);
        counts[i] = binomial(remaining, pi);
        remaining -= counts[i];
        mass -= p[i];
    }
    return counts;
}

CounterRng CounterRng::substream(std::uint64_t index) const noexcept {
    return CounterRng(key_, index ^ 0x5851f42d4c957f2dULL);
}

} // namespace ftparity
