#include "fano/search.hpp"

#include <algorithm>
#include <atomic>
#include <random>
#include <thread>

namespace fano {

namespace {

SearchRecord make_record(const WeightVector& p, Verdict v, std::uint64_t step, double priority,
                         std::int64_t fano_index, const std::string& run_id, const char* engine)
{
    SearchRecord r;
    r.weights = p;
    r.degree = p.sum() - fano_index;
    r.verdict = v;
    r.step = step;
    r.priority = priority;
    r.run_id = run_id;
    r.engine = engine;
    return r;
}

}  // namespace

SearchResult run_fixed(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                       const FixedOptions& options)
{
    SearchResult result;
    PointSet enqueued(seeds.begin(), seeds.end());
    PriorityQueue queue;
    std::uint64_t s = 0;
    std::size_t next_seed = 0;

    while (s < options.s_max) {
        WeightVector p;
        double vp;
        if (next_seed < seeds.size()) {
            p = seeds[next_seed++];
            vp = 1.0;
        } else if (!queue.empty()) {
            auto e = queue.pop();
            p = e.point;
            vp = e.priority;
        } else {
            result.exhausted = true;
            break;
        }
        ++s;
        if (options.on_expand)
            options.on_expand(s, p);
        for (const auto& n : neighbors(p)) {
            if (!enqueued.insert(n).second)
                continue;
            const auto v = oracle(n);
            const bool reward = is_reward(v);
            const double vn = options.constant_priority ? 1.0 : fixed_priority(vp, reward);
            queue.push(n, vn);
            if (reward) {
                result.records.push_back(
                    make_record(n, v, s, vn, options.fano_index, options.run_id, "fixed"));
                if (options.on_record)
                    options.on_record(result.records.back());
            }
        }
    }
    result.steps = s;
    return result;
}

SearchResult run_exhaustive_partition(const Oracle& oracle, const ExhaustiveOptions& options,
                                      std::int64_t leading)
{
    SearchResult result;
    const std::size_t m = options.dimension + 2;
    const std::int64_t max_sum = options.d_max + options.fano_index;
    std::vector<std::int64_t> a(m);
    a[0] = leading;
    std::uint64_t visited = 0;

    auto rec = [&](auto&& self, std::size_t i, std::int64_t sum) -> void {
        if (i == m) {
            if (sum - options.fano_index < 1)
                return;
            ++visited;
            const WeightVector w(std::span<const std::int64_t>(a.data(), m));
            const auto v = oracle(w);
            if (is_reward(v))
                result.records.push_back(
                    make_record(w, v, 0, 0.0, options.fano_index, options.run_id, "exhaustive"));
            return;
        }
        const auto slots = static_cast<std::int64_t>(m - i);
        for (std::int64_t x = a[i - 1]; sum + x * slots <= max_sum; ++x) {
            a[i] = x;
            self(self, i + 1, sum + x);
        }
    };
    if (leading * static_cast<std::int64_t>(m) <= max_sum)
        rec(rec, 1, leading);
    result.steps = visited;
    return result;
}

SearchResult run_exhaustive(const Oracle& oracle, const ExhaustiveOptions& options)
{
    const std::int64_t m = static_cast<std::int64_t>(options.dimension) + 2;
    const std::int64_t max_leading = (options.d_max + options.fano_index) / m;
    std::vector<SearchResult> parts(static_cast<std::size_t>(std::max<std::int64_t>(max_leading, 0)));

    std::atomic<std::int64_t> next{1};
    auto worker = [&] {
        for (auto l = next++; l <= max_leading; l = next++)
            parts[static_cast<std::size_t>(l - 1)] = run_exhaustive_partition(oracle, options, l);
    };
    const unsigned threads = std::max(1u, options.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    SearchResult result;
    result.exhausted = true;  // the whole region was classified
    for (auto& part : parts) {
        result.steps += part.steps;
        result.records.insert(result.records.end(), std::make_move_iterator(part.records.begin()),
                              std::make_move_iterator(part.records.end()));
    }
    return result;
}

SearchResult run_random_expansion(const Oracle& oracle, const std::vector<WeightVector>& seeds,
                                  const RandomOptions& options)
{
    SearchResult result;
    std::mt19937_64 rng(options.rng_seed);
    PointSet enqueued(seeds.begin(), seeds.end());
    std::vector<WeightVector> frontier;
    std::uint64_t s = 0;
    std::size_t next_seed = 0;

    while (s < options.s_max) {
        WeightVector p;
        if (next_seed < seeds.size()) {
            p = seeds[next_seed++];
        } else if (!frontier.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
            const auto i = pick(rng);
            p = frontier[i];
            frontier[i] = frontier.back();
            frontier.pop_back();
        } else {
            result.exhausted = true;
            break;
        }
        ++s;
        for (const auto& n : neighbors(p)) {
            if (!enqueued.insert(n).second)
                continue;
            const auto v = oracle(n);
            frontier.push_back(n);
            if (is_reward(v))
                result.records.push_back(
                    make_record(n, v, s, 0.0, options.fano_index, options.run_id, "random"));
        }
    }
    result.steps = s;
    return result;
}

ClusteredOracle::ClusteredOracle(std::size_t m, std::int64_t extent, std::size_t clusters,
                                 std::int64_t radius, double density, std::uint64_t seed)
    : radius_(radius), density_(density), salt_(seed * 0x9E3779B97F4A7C15ULL + 1)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> coord(1, extent);
    for (std::size_t c = 0; c < clusters; ++c) {
        std::vector<std::int64_t> x(m);
        for (auto& v : x)
            v = coord(rng);
        std::sort(x.begin(), x.end());
        centers_.emplace_back(std::span<const std::int64_t>(x));
    }
}

Verdict ClusteredOracle::operator()(const WeightVector& p) const
{
    bool near = false;
    for (const auto& c : centers_)
        if (l1_distance(p, c) <= radius_) {
            near = true;
            break;
        }
    if (!near)
        return Verdict::non_terminal;
    std::uint64_t h = PointHash{}(p) ^ salt_;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < density_ ? Verdict::terminal_nonquasismooth : Verdict::non_terminal;
}

}  // namespace fano
