#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fano/lattice.hpp"
#include "fano/search.hpp"

namespace fano {

struct NearestResult {
    WeightVector point;
    WeightVector nearest;
    std::int64_t distance = 0;
};

/// Exact L1 nearest neighbour of each p in `queries` among `pool` minus p itself.
/// Throws std::invalid_argument when the pool is empty after exclusion.
std::vector<NearestResult> nearest_distances_scan(const std::vector<WeightVector>& queries,
                                                  const std::vector<WeightVector>& pool);

/// k-d tree over the pool with L1 pruning. Same answers as the scan, including
/// which of several equidistant points is reported (the first in pool order).
class KdIndex {
public:
    explicit KdIndex(std::vector<WeightVector> pool);
    ~KdIndex();
    KdIndex(KdIndex&&) noexcept;
    KdIndex& operator=(KdIndex&&) noexcept;

    /// nullopt when the pool holds nothing but `exclude`.
    std::optional<NearestResult> nearest(const WeightVector& p) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<NearestResult> nearest_distances(const std::vector<WeightVector>& queries,
                                             const std::vector<WeightVector>& pool);

struct StepBounds {
    std::uint64_t lower = 1;
    std::uint64_t upper = 1;
};

/// s_L = #(B(q, D-2) in cone) + 1 and s_U = #(B(q, D-1) in cone); (1, 1) for D < 2.
StepBounds step_bounds(const WeightVector& q, std::int64_t distance);

/// Half-space approximation of s_L: count_ball_halfspace(dim, D - 2) + 1.
std::uint64_t s_lower_approx(std::int64_t distance, int dim);

/// P(s) = (s - (s_L - 1)) / (s_U - (s_L - 1)). Throws unless s_L <= s <= s_U.
double prob_lower_bound(std::uint64_t s, std::uint64_t s_lower, std::uint64_t s_upper);

struct SetPartition {
    std::vector<WeightVector> only_first;
    std::vector<WeightVector> only_second;
    std::vector<WeightVector> both;
};

/// Sorted (F \ D, D \ F, F and D).
SetPartition set_partition(const std::vector<WeightVector>& f, const std::vector<WeightVector>& d);

struct ReachabilityReport {
    WeightVector point;
    WeightVector nearest;
    std::int64_t distance = 0;
    std::uint64_t s_lower = 1;
    std::uint64_t s_upper = 1;
    double p_lower = 1.0;
    /// Whether `point` is also the closest of the reported points to `nearest`.
    bool closest_assumption = false;
};

std::vector<ReachabilityReport> reachability(const std::vector<WeightVector>& points,
                                             const std::vector<WeightVector>& reference);

std::map<std::int64_t, std::uint64_t> distance_histogram(const std::vector<std::int64_t>& distances);

/// Nearest-rank percentile (q in (0, 100]). Throws on empty input.
std::int64_t percentile(std::vector<std::int64_t> values, double q);

std::vector<WeightVector> points_of(const std::vector<SearchRecord>& records);

}  // namespace fano
