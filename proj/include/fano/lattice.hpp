#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fano {

inline constexpr std::size_t max_weights = 8;

/// Fixed-capacity integer point of Z^m (m <= max_weights). Stored inline so that
/// visited sets holding millions of points stay compact.
class LatticePoint {
public:
    LatticePoint() = default;
    explicit LatticePoint(std::span<const std::int64_t> coords);
    LatticePoint(std::initializer_list<std::int64_t> coords);

    std::size_t size() const { return size_; }
    std::int64_t operator[](std::size_t i) const { return coords_[i]; }
    std::int64_t& operator[](std::size_t i) { return coords_[i]; }

    std::span<const std::int64_t> coords() const { return {coords_.data(), size_}; }
    const std::int64_t* begin() const { return coords_.data(); }
    const std::int64_t* end() const { return coords_.data() + size_; }

    std::int64_t sum() const;
    std::vector<std::int64_t> to_vector() const { return {begin(), end()}; }
    std::string to_string() const;

    friend bool operator==(const LatticePoint& a, const LatticePoint& b);
    friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b);

private:
    std::array<std::int64_t, max_weights> coords_{};
    std::size_t size_ = 0;
};

/// True iff 1 <= p[0] <= p[1] <= ... <= p[m-1].
bool in_cone(const LatticePoint& p);

/// A lattice point known to lie in the canonical cone. The weights of
/// X_d in P(a_1, ..., a_m).
class WeightVector {
public:
    WeightVector() = default;
    /// Throws std::invalid_argument unless the point lies in the cone.
    explicit WeightVector(const LatticePoint& p);
    explicit WeightVector(std::span<const std::int64_t> weights);
    WeightVector(std::initializer_list<std::int64_t> weights);

    std::size_t size() const { return point_.size(); }
    std::int64_t operator[](std::size_t i) const { return point_[i]; }
    const LatticePoint& point() const { return point_; }
    std::span<const std::int64_t> weights() const { return point_.coords(); }
    const std::int64_t* begin() const { return point_.begin(); }
    const std::int64_t* end() const { return point_.end(); }
    std::int64_t sum() const { return point_.sum(); }
    std::string to_string() const { return point_.to_string(); }

    friend bool operator==(const WeightVector&, const WeightVector&) = default;
    friend std::strong_ordering operator<=>(const WeightVector& a, const WeightVector& b)
    {
        return a.point_ <=> b.point_;
    }

private:
    LatticePoint point_;
};

struct PointHash {
    std::size_t operator()(const LatticePoint& p) const noexcept;
    std::size_t operator()(const WeightVector& w) const noexcept { return (*this)(w.point()); }
};

/// Cone points at L1 distance 1 from p, coordinate-ascending with -1 before +1.
std::vector<WeightVector> neighbors(const WeightVector& p);

/// Throws std::invalid_argument on a length mismatch.
std::int64_t l1_distance(const LatticePoint& p, const LatticePoint& q);
inline std::int64_t l1_distance(const WeightVector& p, const WeightVector& q)
{
    return l1_distance(p.point(), q.point());
}

/// Exact number of cone points within L1 distance `radius` of `center`.
std::uint64_t count_ball_cone(const WeightVector& center, std::int64_t radius);

/// Number of points of Z^dim with |x|_1 <= radius (closed form).
std::uint64_t count_ball_full(int dim, std::int64_t radius);

/// #{x in Z^dim : |x|_1 <= radius, x_1 >= 0}.
std::uint64_t count_ball_halfspace(int dim, std::int64_t radius);

}  // namespace fano
