#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "fano/lattice.hpp"
#include "fano/oracle.hpp"

namespace fano {

using Oracle = std::function<Verdict(const WeightVector&)>;

struct SearchRecord {
    WeightVector weights;
    std::int64_t degree = 0;
    Verdict verdict = Verdict::not_well_formed;
    std::uint64_t step = 0;
    double priority = 0.0;
    std::string run_id;
    std::string engine;
    std::string timestamp;  // filled in by the writer

    friend bool operator==(const SearchRecord&, const SearchRecord&) = default;
};

struct SearchResult {
    std::vector<SearchRecord> records;
    std::uint64_t steps = 0;
    bool exhausted = false;  // queue ran dry before s_max
};

using RecordSink = std::function<void(const SearchRecord&)>;
using ExpandHook = std::function<void(std::uint64_t step, const WeightVector& p)>;

/// Max-heap on priority; equal priorities come out in insertion order.
class PriorityQueue {
public:
    struct Entry {
        double priority;
        std::uint64_t order;
        WeightVector point;
    };

    void push(const WeightVector& p, double priority) { heap_.push({priority, next_++, p}); }
    Entry pop()
    {
        Entry e = heap_.top();
        heap_.pop();
        return e;
    }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

private:
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.priority != b.priority)
                return a.priority < b.priority;
            return a.order > b.order;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_ = 0;
};

using PointSet = std::unordered_set<WeightVector, PointHash>;

/// v(n) = 1 for a reward, v(p)/2 otherwise.
constexpr double fixed_priority(double parent_priority, bool reward)
{
    return reward ? 1.0 : parent_priority / 2.0;
}

struct FixedOptions {
    std::uint64_t s_max = 0;
    bool constant_priority = false;  // v = 1 everywhere: breadth-first order
    std::int64_t fano_index = 1;
    std::string run_id;
    RecordSink on_record;
    ExpandHook on_expand;
};

/// Best-first search with the halving heuristic. Seeds are expanded first, in the
/// given order, and each seed expansion is a step. Every generated point is
/// classified once; reward points are returned in discovery order.
SearchResult run_fixed(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                       const FixedOptions& options);

struct ExhaustiveOptions {
    std::int64_t d_max = 0;
    std::size_t dimension = 4;  // n; vectors have n + 2 weights
    std::int64_t fano_index = 1;
    unsigned threads = 1;
    std::string run_id;
};

/// Classifies every cone point with 1 <= degree <= d_max; returns the terminal ones
/// in lexicographic order (step and priority are 0). Work is split by the leading
/// weight across threads.
SearchResult run_exhaustive(const Oracle& oracle, const ExhaustiveOptions& options);

/// The points with leading weight a_1 = leading only (one partition).
SearchResult run_exhaustive_partition(const Oracle& oracle, const ExhaustiveOptions& options,
                                      std::int64_t leading);

struct RandomOptions {
    std::uint64_t s_max = 0;
    std::uint64_t rng_seed = 0;
    std::int64_t fano_index = 1;
    std::string run_id;
};

/// Baseline: expands a uniformly random frontier point at each step.
SearchResult run_random_expansion(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                                  const RandomOptions& options);

/// Rewards on clusters of Z^m cone points: a point is a reward when it lies within
/// `radius` (L1) of one of `clusters` centers drawn from the seeded stream inside
/// the box [1, extent]^m and is not excluded by a sparse hash mask.
class ClusteredOracle {
public:
    ClusteredOracle(std::size_t m, std::int64_t extent, std::size_t clusters, std::int64_t radius,
                    double density, std::uint64_t seed);

    Verdict operator()(const WeightVector& p) const;
    const std::vector<WeightVector>& centers() const { return centers_; }

private:
    std::vector<WeightVector> centers_;
    std::int64_t radius_;
    double density_;
    std::uint64_t salt_;
};

}  // namespace fano
