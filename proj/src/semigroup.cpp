#include "fano/semigroup.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fano {

NumericalSemigroup::NumericalSemigroup(std::span<const std::int64_t> generators)
{
    if (generators.empty())
        return;
    for (auto g : generators)
        if (g <= 0)
            throw std::invalid_argument("semigroup generators must be positive");

    modulus_ = *std::min_element(generators.begin(), generators.end());
    if (modulus_ == 1)
        return;

    constexpr auto inf = std::numeric_limits<std::int64_t>::max();
    const auto g = modulus_;
    std::vector<std::int64_t> w(static_cast<std::size_t>(g), inf);
    w[0] = 0;

    // Round-robin update (Boecker-Liptak): for each residue cycle induced by a
    // generator, one pass starting from the cycle minimum is enough.
    for (auto a : generators) {
        const auto step = a % g;
        if (step == 0)
            continue;
        const auto cycles = std::gcd(step, g);
        const auto len = g / cycles;
        for (std::int64_t p = 0; p < cycles; ++p) {
            std::int64_t best = inf;
            for (std::int64_t j = 0, rho = p; j < len; ++j, rho = (rho + step) % g)
                best = std::min(best, w[static_cast<std::size_t>(rho)]);
            if (best == inf)
                continue;
            std::int64_t n = best;
            for (std::int64_t j = 0; j < len; ++j) {
                n += a;
                auto& slot = w[static_cast<std::size_t>(n % g)];
                n = std::min(n, slot);
                slot = n;
            }
        }
    }

    apery_.resize(w.size());
    std::transform(w.begin(), w.end(), apery_.begin(),
                   [](std::int64_t v) { return v == inf ? -1 : v; });
}

}  // namespace fano
