#include "fano/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace fano {

LatticePoint::LatticePoint(std::span<const std::int64_t> coords)
{
    if (coords.size() > max_weights)
        throw std::invalid_argument("lattice point dimension exceeds " +
                                    std::to_string(max_weights));
    std::copy(coords.begin(), coords.end(), coords_.begin());
    size_ = coords.size();
}

LatticePoint::LatticePoint(std::initializer_list<std::int64_t> coords)
    : LatticePoint(std::span<const std::int64_t>(coords.begin(), coords.size()))
{
}

std::int64_t LatticePoint::sum() const
{
    std::int64_t s = 0;
    for (auto c : coords())
        s += c;
    return s;
}

std::string LatticePoint::to_string() const
{
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < size_; ++i) {
        if (i)
            os << ',';
        os << coords_[i];
    }
    os << ')';
    return os.str();
}

bool operator==(const LatticePoint& a, const LatticePoint& b)
{
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
}

std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b)
{
    return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

bool in_cone(const LatticePoint& p)
{
    if (p.size() == 0 || p[0] < 1)
        return false;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i - 1] > p[i])
            return false;
    return true;
}

WeightVector::WeightVector(const LatticePoint& p) : point_(p)
{
    if (!in_cone(point_))
        throw std::invalid_argument("weights " + point_.to_string() +
                                    " are not in the cone 1 <= a_1 <= ... <= a_m");
}

WeightVector::WeightVector(std::span<const std::int64_t> weights)
    : WeightVector(LatticePoint(weights))
{
}

WeightVector::WeightVector(std::initializer_list<std::int64_t> weights)
    : WeightVector(LatticePoint(weights))
{
}

std::size_t PointHash::operator()(const LatticePoint& p) const noexcept
{
    // FNV-1a over the coordinates
    std::uint64_t h = 1469598103934665603ULL;
    for (auto c : p.coords()) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
}

std::vector<WeightVector> neighbors(const WeightVector& p)
{
    std::vector<WeightVector> out;
    out.reserve(2 * p.size());
    LatticePoint q = p.point();
    const std::size_t m = p.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::int64_t lo = i == 0 ? 1 : q[i - 1];
        const std::int64_t hi = i + 1 == m ? INT64_MAX : q[i + 1];
        const std::int64_t c = q[i];
        if (c - 1 >= lo) {
            q[i] = c - 1;
            out.emplace_back(q);
        }
        if (c + 1 <= hi) {
            q[i] = c + 1;
            out.emplace_back(q);
        }
        q[i] = c;
    }
    return out;
}

std::int64_t l1_distance(const LatticePoint& p, const LatticePoint& q)
{
    if (p.size() != q.size())
        throw std::invalid_argument("l1_distance: length mismatch");
    std::int64_t d = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        d += std::llabs(p[i] - q[i]);
    return d;
}

namespace {

std::uint64_t count_cone_rec(const WeightVector& c, std::size_t i, std::int64_t lo,
                             std::int64_t rem)
{
    const std::int64_t first = std::max(lo, c[i] - rem);
    const std::int64_t last = c[i] + rem;
    if (first > last)
        return 0;
    if (i + 1 == c.size())
        return static_cast<std::uint64_t>(last - first + 1);
    std::uint64_t total = 0;
    for (std::int64_t x = first; x <= last; ++x)
        total += count_cone_rec(c, i + 1, x, rem - std::llabs(x - c[i]));
    return total;
}

std::uint64_t binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::int64_t j = 1; j <= k; ++j)
        r = r * static_cast<std::uint64_t>(n - k + j) / static_cast<std::uint64_t>(j);
    return r;
}

}  // namespace

std::uint64_t count_ball_cone(const WeightVector& center, std::int64_t radius)
{
    if (radius < 0 || center.size() == 0)
        return 0;
    return count_cone_rec(center, 0, 1, radius);
}

std::uint64_t count_ball_full(int dim, std::int64_t radius)
{
    if (radius < 0)
        return 0;
    std::uint64_t total = 0;
    for (int j = 0; j <= dim; ++j)
        total += (std::uint64_t{1} << j) * binomial(dim, j) * binomial(radius, j);
    return total;
}

std::uint64_t count_ball_halfspace(int dim, std::int64_t radius)
{
    if (dim < 1)
        throw std::invalid_argument("count_ball_halfspace: dim must be >= 1");
    if (radius < 0)
        return 0;
    return (count_ball_full(dim, radius) + count_ball_full(dim - 1, radius)) / 2;
}

}  // namespace fano
