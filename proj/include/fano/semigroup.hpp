#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fano {

/// Membership oracle for the additive monoid generated by a finite set of positive
/// integers, via the Apery set with respect to the smallest generator.
class NumericalSemigroup {
public:
    NumericalSemigroup() = default;  // the trivial monoid {0}
    explicit NumericalSemigroup(std::span<const std::int64_t> generators);

    bool contains(std::int64_t n) const
    {
        if (n < 0)
            return false;
        if (n == 0)
            return true;
        if (modulus_ == 0)
            return false;
        if (modulus_ == 1)
            return true;
        const auto w = apery_[static_cast<std::size_t>(n % modulus_)];
        return w >= 0 && w <= n;
    }

    std::int64_t smallest_generator() const { return modulus_; }

private:
    std::int64_t modulus_ = 0;
    // apery_[rho] = least element congruent to rho, or -1 when the class is empty
    std::vector<std::int64_t> apery_;
};

}  // namespace fano
