#include "fano/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fano {

std::vector<NearestResult> nearest_distances_scan(const std::vector<WeightVector>& queries,
                                                  const std::vector<WeightVector>& pool)
{
    std::vector<NearestResult> out;
    out.reserve(queries.size());
    for (const auto& p : queries) {
        std::int64_t best = std::numeric_limits<std::int64_t>::max();
        const WeightVector* arg = nullptr;
        for (const auto& q : pool) {
            if (q == p)
                continue;
            const auto d = l1_distance(p, q);
            if (d < best) {
                best = d;
                arg = &q;
            }
        }
        if (!arg)
            throw std::invalid_argument("nearest_distances: reference set is empty");
        out.push_back({p, *arg, best});
    }
    return out;
}

struct KdIndex::Impl {
    struct Node {
        std::array<std::int64_t, max_weights> lo{}, hi{};
        std::uint32_t begin = 0, end = 0;  // range in `order` (leaves)
        std::int32_t left = -1, right = -1;
    };
    std::vector<WeightVector> pool;
    std::vector<std::uint32_t> order;
    std::vector<Node> nodes;
    std::size_t dim = 0;

    static constexpr std::uint32_t leaf_size = 8;

    std::int32_t build(std::uint32_t begin, std::uint32_t end)
    {
        Node node;
        node.begin = begin;
        node.end = end;
        node.lo.fill(std::numeric_limits<std::int64_t>::max());
        node.hi.fill(std::numeric_limits<std::int64_t>::min());
        for (auto k = begin; k < end; ++k)
            for (std::size_t i = 0; i < dim; ++i) {
                node.lo[i] = std::min(node.lo[i], pool[order[k]][i]);
                node.hi[i] = std::max(node.hi[i], pool[order[k]][i]);
            }
        const auto id = static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= leaf_size)
            return id;
        std::size_t axis = 0;
        for (std::size_t i = 1; i < dim; ++i)
            if (node.hi[i] - node.lo[i] > node.hi[axis] - node.lo[axis])
                axis = i;
        if (node.hi[axis] == node.lo[axis])
            return id;  // all points identical
        const auto mid = begin + (end - begin) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return pool[a][axis] < pool[b][axis];
                         });
        const auto l = build(begin, mid);
        const auto r = build(mid, end);
        nodes[static_cast<std::size_t>(id)].left = l;
        nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::int64_t box_distance(const Node& n, const WeightVector& p) const
    {
        std::int64_t d = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            if (p[i] < n.lo[i])
                d += n.lo[i] - p[i];
            else if (p[i] > n.hi[i])
                d += p[i] - n.hi[i];
        }
        return d;
    }

    void search(std::int32_t id, const WeightVector& p, std::int64_t& best,
                std::uint32_t& arg) const
    {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        if (box_distance(n, p) > best)
            return;
        if (n.left < 0) {
            for (auto k = n.begin; k < n.end; ++k) {
                const auto idx = order[k];
                const auto& q = pool[idx];
                if (q == p)
                    continue;
                const auto d = l1_distance(p, q);
                if (d < best || (d == best && idx < arg)) {
                    best = d;
                    arg = idx;
                }
            }
            return;
        }
        const auto& l = nodes[static_cast<std::size_t>(n.left)];
        const auto& r = nodes[static_cast<std::size_t>(n.right)];
        if (box_distance(l, p) <= box_distance(r, p)) {
            search(n.left, p, best, arg);
            search(n.right, p, best, arg);
        } else {
            search(n.right, p, best, arg);
            search(n.left, p, best, arg);
        }
    }
};

KdIndex::KdIndex(std::vector<WeightVector> pool) : impl_(std::make_unique<Impl>())
{
    impl_->pool = std::move(pool);
    if (impl_->pool.empty())
        return;
    impl_->dim = impl_->pool.front().size();
    for (const auto& q : impl_->pool)
        if (q.size() != impl_->dim)
            throw std::invalid_argument("KdIndex: mixed dimensions");
    impl_->order.resize(impl_->pool.size());
    std::iota(impl_->order.begin(), impl_->order.end(), 0u);
    impl_->build(0, static_cast<std::uint32_t>(impl_->pool.size()));
}

KdIndex::~KdIndex() = default;
KdIndex::KdIndex(KdIndex&&) noexcept = default;
KdIndex& KdIndex::operator=(KdIndex&&) noexcept = default;

std::optional<NearestResult> KdIndex::nearest(const WeightVector& p) const
{
    if (impl_->nodes.empty())
        return std::nullopt;
    if (p.size() != impl_->dim)
        throw std::invalid_argument("l1_distance: length mismatch");
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::uint32_t arg = std::numeric_limits<std::uint32_t>::max();
    impl_->search(0, p, best, arg);
    if (arg == std::numeric_limits<std::uint32_t>::max())
        return std::nullopt;
    return NearestResult{p, impl_->pool[arg], best};
}

std::vector<NearestResult> nearest_distances(const std::vector<WeightVector>& queries,
                                             const std::vector<WeightVector>& pool)
{
    if (pool.size() < 64)
        return nearest_distances_scan(queries, pool);
    const KdIndex index(pool);
    std::vector<NearestResult> out;
    out.reserve(queries.size());
    for (const auto& p : queries) {
        auto r = index.nearest(p);
        if (!r)
            throw std::invalid_argument("nearest_distances: reference set is empty");
        out.push_back(*r);
    }
    return out;
}

StepBounds step_bounds(const WeightVector& q, std::int64_t distance)
{
    if (distance < 2)
        return {1, 1};
    return {count_ball_cone(q, distance - 2) + 1, count_ball_cone(q, distance - 1)};
}

std::uint64_t s_lower_approx(std::int64_t distance, int dim)
{
    if (distance < 2)
        return 1;
    return count_ball_halfspace(dim, distance - 2) + 1;
}

double prob_lower_bound(std::uint64_t s, std::uint64_t s_lower, std::uint64_t s_upper)
{
    if (s < s_lower || s > s_upper)
        throw std::invalid_argument("prob_lower_bound: s outside [s_L, s_U]");
    return static_cast<double>(s - (s_lower - 1)) / static_cast<double>(s_upper - (s_lower - 1));
}

SetPartition set_partition(const std::vector<WeightVector>& f, const std::vector<WeightVector>& d)
{
    auto a = f, b = d;
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    SetPartition out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.only_first));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(out.only_second));
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.both));
    return out;
}

std::vector<ReachabilityReport> reachability(const std::vector<WeightVector>& points,
                                             const std::vector<WeightVector>& reference)
{
    std::vector<ReachabilityReport> out;
    const auto nn = nearest_distances(points, reference);
    for (const auto& r : nn) {
        ReachabilityReport rep;
        rep.point = r.point;
        rep.nearest = r.nearest;
        rep.distance = r.distance;
        const auto b = step_bounds(r.nearest, r.distance);
        rep.s_lower = b.lower;
        rep.s_upper = b.upper;
        rep.p_lower = prob_lower_bound(b.lower, b.lower, b.upper);
        std::int64_t closest = std::numeric_limits<std::int64_t>::max();
        for (const auto& p : points)
            closest = std::min(closest, l1_distance(p, r.nearest));
        rep.closest_assumption = closest == r.distance;
        out.push_back(rep);
    }
    return out;
}

std::map<std::int64_t, std::uint64_t> distance_histogram(const std::vector<std::int64_t>& distances)
{
    std::map<std::int64_t, std::uint64_t> h;
    for (auto d : distances)
        ++h[d];
    return h;
}

std::int64_t percentile(std::vector<std::int64_t> values, double q)
{
    if (values.empty())
        throw std::invalid_argument("percentile: no values");
    if (!(q > 0 && q <= 100))
        throw std::invalid_argument("percentile: q must be in (0, 100]");
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<WeightVector> points_of(const std::vector<SearchRecord>& records)
{
    std::vector<WeightVector> out;
    out.reserve(records.size());
    for (const auto& r : records)
        out.push_back(r.weights);
    return out;
}

}  // namespace fano
