#include "fano/oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <mutex>
#include <numeric>

namespace fano {

namespace {

constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;

std::vector<std::int64_t> select(std::span<const std::int64_t> weights,
                                 std::span<const int> idx)
{
    std::vector<std::int64_t> out;
    out.reserve(idx.size());
    for (int i : idx)
        out.push_back(weights[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<int> mask_indices(std::uint32_t mask, std::size_t m)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < m; ++i)
        if (mask & (1u << i))
            out.push_back(static_cast<int>(i));
    return out;
}

const std::vector<std::uint32_t>& masks_by_size(std::size_t m)
{
    static const auto table = [] {
        std::array<std::vector<std::uint32_t>, max_weights + 1> t;
        for (std::size_t k = 1; k <= max_weights; ++k) {
            auto& v = t[k];
            for (std::uint32_t mask = 1; mask < (1u << k); ++mask)
                v.push_back(mask);
            std::stable_sort(v.begin(), v.end(), [](std::uint32_t a, std::uint32_t b) {
                return std::popcount(a) < std::popcount(b);
            });
        }
        return t;
    }();
    return table[m];
}

// Number of exponent vectors with sum m_i w_i == target, saturating at cap + 1.
std::uint64_t count_representations(std::span<const std::int64_t> w, std::int64_t target,
                                     std::uint64_t cap)
{
    if (target < 0)
        return 0;
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(target) + 1, 0);
    ways[0] = 1;
    for (auto a : w)
        for (std::int64_t t = a; t <= target; ++t) {
            auto& slot = ways[static_cast<std::size_t>(t)];
            slot = std::min(cap + 1, slot + ways[static_cast<std::size_t>(t - a)]);
        }
    return ways[static_cast<std::size_t>(target)];
}

void enumerate_rec(std::span<const std::int64_t> w, std::size_t i, std::int64_t rem,
                   Exponent& cur, std::vector<Exponent>& out, std::size_t cap)
{
    if (i + 1 == w.size()) {
        if (rem % w[i] != 0)
            return;
        cur[i] = rem / w[i];
        if (out.size() >= cap)
            throw MonomialCapExceeded("more than " + std::to_string(cap) + " monomials");
        out.push_back(cur);
        return;
    }
    for (std::int64_t e = rem / w[i]; e >= 0; --e) {
        cur[i] = e;
        enumerate_rec(w, i + 1, rem - e * w[i], cur, out, cap);
    }
    cur[i] = 0;
}

std::int64_t residue_sum(std::span<const std::int64_t> b, std::int64_t k, std::int64_t r)
{
    std::int64_t s = 0;
    for (auto x : b)
        s += (k * x) % r;
    return s;
}

}  // namespace

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::not_well_formed:
        return "not_well_formed";
    case Verdict::non_terminal:
        return "non_terminal";
    case Verdict::terminal_quasismooth:
        return "terminal_qs";
    case Verdict::terminal_nonquasismooth:
        return "terminal_nonqs";
    }
    return "unknown";
}

Verdict verdict_from_string(std::string_view s)
{
    for (auto v : {Verdict::not_well_formed, Verdict::non_terminal,
                   Verdict::terminal_quasismooth, Verdict::terminal_nonquasismooth})
        if (to_string(v) == s)
            return v;
    throw std::invalid_argument("unknown verdict '" + std::string(s) + "'");
}

std::int64_t degree_of(const WeightVector& weights, std::int64_t fano_index)
{
    const auto d = weights.sum() - fano_index;
    if (d < 1)
        throw std::invalid_argument("weights " + weights.to_string() +
                                    " give no hypersurface of Fano index " +
                                    std::to_string(fano_index));
    return d;
}

bool monomial_exists(std::span<const std::int64_t> weights, std::int64_t d,
                     std::span<const int> support, std::optional<int> tag)
{
    if (support.empty())
        throw std::invalid_argument("monomial_exists: empty support");
    const auto target = d - (tag ? weights[static_cast<std::size_t>(*tag)] : 0);
    const auto w = select(weights, support);
    return NumericalSemigroup(w).contains(target);
}

std::vector<Exponent> enumerate_monomials(std::span<const std::int64_t> weights,
                                          std::int64_t d, std::size_t cap)
{
    std::vector<Exponent> out;
    if (weights.empty() || d < 0)
        return out;
    Exponent cur(weights.size(), 0);
    enumerate_rec(weights, 0, d, cur, out, cap);
    return out;
}

bool rst_terminal(const SingularityType& t)
{
    for (std::int64_t k = 1; k < t.r; ++k)
        if (residue_sum(t.local_weights, k, t.r) <= t.r)
            return false;
    return true;
}

bool mori_terminal_approx(const SingularityType& t)
{
    if (t.r <= 1)
        return true;
    if (t.local_monomials.empty())
        throw DegenerateFamily("local equation has no monomials");
    std::vector<std::int64_t> cost(t.local_weights.size());
    for (std::int64_t k = 1; k < t.r; ++k) {
        std::int64_t total = 0;
        for (std::size_t i = 0; i < cost.size(); ++i) {
            cost[i] = (k * t.local_weights[i]) % t.r;
            total += cost[i];
        }
        std::int64_t best = inf;
        for (const auto& m : t.local_monomials) {
            std::int64_t c = 0;
            for (std::size_t i = 0; i < m.size(); ++i)
                c += m[i] * cost[i];
            best = std::min(best, c);
        }
        if (total - best - t.r <= 0)
            return false;
    }
    return true;
}

LocalEquation::LocalEquation(std::span<const std::int64_t> weights, std::int64_t d,
                             std::span<const int> stratum)
    : d_(d)
{
    std::uint32_t mask = 0;
    for (int i : stratum)
        mask |= 1u << i;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!(mask & (1u << i))) {
            transverse_.push_back(static_cast<int>(i));
            transverse_weights_.push_back(weights[i]);
        }
    stratum_semigroup_ = NumericalSemigroup(select(weights, stratum));
}

bool LocalEquation::admissible(std::int64_t t) const
{
    return t >= 0 && t <= d_ && stratum_semigroup_.contains(d_ - t);
}

std::optional<std::int64_t> LocalEquation::min_cost(std::span<const std::int64_t> costs) const
{
    thread_local std::vector<std::int64_t> best;
    best.assign(static_cast<std::size_t>(d_) + 1, inf);
    best[0] = 0;
    std::int64_t answer = stratum_semigroup_.contains(d_) ? 0 : inf;
    for (std::int64_t t = 1; t <= d_; ++t) {
        std::int64_t b = inf;
        for (std::size_t j = 0; j < transverse_weights_.size(); ++j) {
            const auto a = transverse_weights_[j];
            if (a <= t) {
                const auto prev = best[static_cast<std::size_t>(t - a)];
                if (prev != inf)
                    b = std::min(b, prev + costs[j]);
            }
        }
        best[static_cast<std::size_t>(t)] = b;
        if (b < answer && stratum_semigroup_.contains(d_ - t))
            answer = b;
    }
    if (answer == inf)
        return std::nullopt;
    return answer;
}

std::uint64_t LocalEquation::count(std::uint64_t cap) const
{
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(d_) + 1, 0);
    ways[0] = 1;
    for (auto a : transverse_weights_)
        for (std::int64_t t = a; t <= d_; ++t) {
            auto& slot = ways[static_cast<std::size_t>(t)];
            slot = std::min(cap + 1, slot + ways[static_cast<std::size_t>(t - a)]);
        }
    std::uint64_t total = 0;
    for (std::int64_t t = 0; t <= d_; ++t)
        if (ways[static_cast<std::size_t>(t)] && stratum_semigroup_.contains(d_ - t))
            total = std::min(cap + 1, total + ways[static_cast<std::size_t>(t)]);
    return total;
}

std::vector<Exponent> LocalEquation::enumerate(std::size_t cap) const
{
    std::vector<Exponent> out;
    const auto n = transverse_weights_.size();
    if (n == 0)
        return out;
    Exponent cur(n, 0);
    // depth-first, each coordinate descending, so the output is lex-descending
    auto rec = [&](auto&& self, std::size_t i, std::int64_t used) -> void {
        if (i == n) {
            if (admissible(used)) {
                if (out.size() >= cap)
                    throw MonomialCapExceeded("more than " + std::to_string(cap) +
                                              " local monomials");
                out.push_back(cur);
            }
            return;
        }
        const auto a = transverse_weights_[i];
        for (std::int64_t e = (d_ - used) / a; e >= 0; --e) {
            cur[i] = e;
            self(self, i + 1, used + e * a);
        }
        cur[i] = 0;
    };
    rec(rec, 0, 0);
    return out;
}

std::vector<Exponent> LocalEquation::sample(int max_total) const
{
    std::vector<Exponent> out;
    const auto n = transverse_weights_.size();
    Exponent cur(n, 0);
    auto rec = [&](auto&& self, std::size_t i, std::int64_t used, int left) -> void {
        if (i == n) {
            if (admissible(used))
                out.push_back(cur);
            return;
        }
        const auto a = transverse_weights_[i];
        for (int e = 0; e <= left && used + e * a <= d_; ++e) {
            cur[i] = e;
            self(self, i + 1, used + e * a, left - e);
        }
        cur[i] = 0;
    };
    rec(rec, 0, 0, max_total);
    for (std::size_t j = 0; j < n; ++j) {
        const auto a = transverse_weights_[j];
        for (std::int64_t e = max_total + 1; e * a <= d_; ++e)
            if (admissible(e * a)) {
                Exponent p(n, 0);
                p[j] = e;
                out.push_back(std::move(p));
                break;
            }
    }
    return out;
}

Rational local_min_weight(std::int64_t r, std::span<const std::int64_t> residues,
                          std::span<const std::int64_t> weights, std::int64_t d,
                          int patch_index)
{
    if (r < 2)
        throw std::invalid_argument("local_min_weight: r must be >= 2");
    if (residues.size() + 1 != weights.size())
        throw std::invalid_argument("local_min_weight: one residue per non-patch variable");
    const int patch[] = {patch_index};
    LocalEquation eq(weights, d, patch);
    auto best = eq.min_cost(residues);
    if (!best)
        throw DegenerateFamily("no monomial of f on the patch x_" +
                               std::to_string(patch_index) + " = 1");
    return {*best, r};
}

namespace {

struct Stratum {
    std::uint32_t mask = 0;
    std::vector<int> support;
    std::int64_t h = 1;
    int monomials = 0;  // 0, 1 or 2 (= at least two)
    int dimension = -1;
    NumericalSemigroup semigroup;
};

// Mori's inequality for every k, on a hyperquotient stratum. `b` are the residues
// of the transverse variables; the along-stratum coordinates have residue 0.
bool mori_on_stratum(const LocalEquation& eq, std::int64_t r,
                     std::span<const std::int64_t> b, const OracleOptions& options,
                     SingularityType& type, std::string& note)
{
    const auto n = b.size();
    const auto count = options.keep_monomials ? eq.count(options.enumeration_cap) : 0;
    if (options.keep_monomials && count == 0)
        throw DegenerateFamily("local equation has no monomials");

    if (options.keep_monomials && count <= options.enumeration_cap) {
        // Same verdict as the DP below; taken only when the caller wants f' listed.
        SingularityType explicit_type = type;
        auto monomials = eq.enumerate(options.enumeration_cap);
        const auto zeros = type.local_weights.size() - n;
        for (auto& m : monomials)
            m.resize(m.size() + zeros, 0);
        explicit_type.local_monomials = std::move(monomials);
        const bool ok = mori_terminal_approx(explicit_type);
        if (options.keep_monomials)
            type.local_monomials = std::move(explicit_type.local_monomials);
        note = "mori (enumerated " + std::to_string(count) + " monomials)";
        return ok;
    }

    note = "mori (residue DP)";
    const auto pool = eq.sample(2);
    std::vector<std::int64_t> cost(n);
    for (std::int64_t k = 1; k < r; ++k) {
        std::int64_t total = 0;
        for (std::size_t j = 0; j < n; ++j) {
            cost[j] = (k * b[j]) % r;
            total += cost[j];
        }
        const auto budget = total - r;  // pass iff min cost < budget
        if (budget <= 0)
            return false;
        bool certified = false;
        for (const auto& m : pool) {
            std::int64_t c = 0;
            for (std::size_t j = 0; j < n; ++j)
                c += m[j] * cost[j];
            if (c < budget) {
                certified = true;
                break;
            }
        }
        if (certified)
            continue;
        const auto best = eq.min_cost(cost);
        if (!best)
            throw DegenerateFamily("local equation has no monomials");
        if (*best >= budget)
            return false;
    }
    return true;
}

}  // namespace

Classification classify_degree(const WeightVector& weights, std::int64_t d,
                               const OracleOptions& options)
{
    const auto w = weights.weights();
    const auto m = w.size();
    if (m < 3)
        throw std::invalid_argument("classify: need at least 3 weights");
    const int n = static_cast<int>(m) - 2;

    Classification result;
    result.degree = d;
    result.verdict = Verdict::not_well_formed;
    if (d < 1)
        return result;

    for (std::size_t i = 0; i < m; ++i) {
        std::int64_t g = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i)
                g = std::gcd(g, w[j]);
        if (g != 1) {
            StratumReport rep;
            rep.note = "ambient space not well-formed";
            result.strata.push_back(std::move(rep));
            return result;
        }
    }

    std::vector<Stratum> strata;
    const std::uint32_t full = (1u << m) - 1;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        std::int64_t h = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i))
                h = std::gcd(h, w[i]);
        if (h == 1)
            continue;

        Stratum s;
        s.mask = mask;
        s.h = h;
        s.support = mask_indices(mask, m);
        const auto sw = select(w, s.support);
        s.semigroup = NumericalSemigroup(sw);
        if (!s.semigroup.contains(d)) {
            s.monomials = 0;
        } else if (s.support.size() == 1) {
            s.monomials = 1;
        } else {
            std::vector<std::int64_t> scaled(sw.size());
            std::transform(sw.begin(), sw.end(), scaled.begin(),
                           [h](std::int64_t a) { return a / h; });
            s.monomials = static_cast<int>(count_representations(scaled, d / h, 1));
        }
        const int k = static_cast<int>(s.support.size());
        s.dimension = s.monomials == 0 ? k - 1 : (s.monomials == 1 ? -1 : k - 2);
        if (s.dimension < 0)
            continue;
        if (s.dimension > n - 2) {
            StratumReport rep;
            rep.support = s.support;
            rep.dimension = s.dimension;
            rep.type.r = h;
            rep.terminal = false;
            rep.note = "meets Sing P in codimension 1";
            result.strata.push_back(std::move(rep));
            return result;
        }
        strata.push_back(std::move(s));
    }

    // Cheap verdicts first: codimension-2 strata, then strata where X is cut
    // transversally; hyperquotient candidates (the DP) last.
    std::stable_sort(strata.begin(), strata.end(), [n](const Stratum& x, const Stratum& y) {
        auto rank = [n](const Stratum& s) { return s.dimension == n - 2 ? 0 : (s.monomials >= 2 ? 1 : 2); };
        return rank(x) < rank(y);
    });

    bool all_terminal = true;
    for (auto& s : strata) {
        StratumReport rep;
        rep.support = s.support;
        rep.dimension = s.dimension;
        rep.type.r = s.h;
        const int k = static_cast<int>(s.support.size());

        std::vector<int> transverse;
        for (std::size_t j = 0; j < m; ++j)
            if (!(s.mask & (1u << j)))
                transverse.push_back(static_cast<int>(j));

        if (s.dimension == n - 2) {
            rep.terminal = false;
            rep.note = "singular in codimension 2";
        } else if (s.monomials >= 2) {
            // X cuts the stratum in a hypersurface; a general point is quasismooth
            // with the normal direction inside the stratum.
            for (int j : transverse)
                rep.type.local_weights.push_back(w[static_cast<std::size_t>(j)] % s.h);
            rep.type.local_weights.resize(rep.type.local_weights.size() +
                                          static_cast<std::size_t>(k - 2), 0);
            rep.terminal = rst_terminal(rep.type);
            rep.note = "quotient (transverse section)";
        } else {
            int tagged = -1;
            for (int j : transverse)
                if (s.semigroup.contains(d - w[static_cast<std::size_t>(j)])) {
                    tagged = j;
                    break;
                }
            if (tagged >= 0) {
                for (int j : transverse)
                    if (j != tagged)
                        rep.type.local_weights.push_back(w[static_cast<std::size_t>(j)] % s.h);
                rep.type.local_weights.resize(rep.type.local_weights.size() +
                                              static_cast<std::size_t>(k - 1), 0);
                rep.terminal = rst_terminal(rep.type);
                rep.note = "quotient (eliminates x_" + std::to_string(tagged) + ")";
            } else {
                rep.type.kind = SingularityKind::hyperquotient;
                rep.type.equation_residue = d % s.h;
                std::vector<std::int64_t> b;
                for (int j : transverse)
                    b.push_back(w[static_cast<std::size_t>(j)] % s.h);
                rep.type.local_weights = b;
                rep.type.local_weights.resize(b.size() + static_cast<std::size_t>(k - 1), 0);
                LocalEquation eq(w, d, s.support);
                try {
                    rep.terminal = mori_on_stratum(eq, s.h, b, options, rep.type, rep.note);
                } catch (const DegenerateFamily& e) {
                    rep.terminal = false;
                    rep.note = std::string("degenerate: ") + e.what();
                }
            }
        }
        all_terminal = all_terminal && rep.terminal;
        result.strata.push_back(std::move(rep));
        if (!all_terminal && !options.full_report)
            break;
    }

    if (!all_terminal) {
        result.verdict = Verdict::non_terminal;
        return result;
    }
    result.quasismooth = is_quasismooth(weights, d);
    result.verdict = result.quasismooth ? Verdict::terminal_quasismooth
                                        : Verdict::terminal_nonquasismooth;
    return result;
}

Classification classify(const WeightVector& weights, std::int64_t fano_index,
                        const OracleOptions& options)
{
    return classify_degree(weights, weights.sum() - fano_index, options);
}

bool is_well_formed(const WeightVector& weights, std::int64_t d)
{
    const auto w = weights.weights();
    const auto m = w.size();
    for (std::size_t i = 0; i < m; ++i) {
        std::int64_t g = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i)
                g = std::gcd(g, w[j]);
        if (g != 1)
            return false;
    }
    const int n = static_cast<int>(m) - 2;
    const std::uint32_t full = (1u << m) - 1;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
        std::int64_t h = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (1u << i))
                h = std::gcd(h, w[i]);
        if (h == 1)
            continue;
        const auto support = mask_indices(mask, m);
        const int k = static_cast<int>(support.size());
        const auto sw = select(w, support);
        int dim;
        if (!NumericalSemigroup(sw).contains(d)) {
            dim = k - 1;
        } else if (k == 1) {
            dim = -1;
        } else {
            std::vector<std::int64_t> scaled(sw.size());
            std::transform(sw.begin(), sw.end(), scaled.begin(),
                           [h](std::int64_t a) { return a / h; });
            dim = count_representations(scaled, d / h, 1) >= 2 ? k - 2 : -1;
        }
        if (dim > n - 2)
            return false;
    }
    return true;
}

bool is_quasismooth(const WeightVector& weights, std::int64_t d)
{
    const auto w = weights.weights();
    const auto m = w.size();

    std::uint32_t units = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (w[i] == 1)
            units |= 1u << i;

    // Subsets by size, so that the cheap singleton failures are found first.
    for (auto mask : masks_by_size(m)) {
        if (mask & units)
            continue;
        const auto support = mask_indices(mask, m);
        std::size_t tagged = 0;
        if (support.size() == 1) {
            const auto a = w[static_cast<std::size_t>(support[0])];
            if (d % a == 0)
                continue;
            for (std::size_t j = 0; j < m; ++j)
                if (!(mask & (1u << j)) && d >= w[j] && (d - w[j]) % a == 0)
                    ++tagged;
        } else {
            const NumericalSemigroup sg(select(w, support));
            if (sg.contains(d))
                continue;
            for (std::size_t j = 0; j < m; ++j)
                if (!(mask & (1u << j)) && sg.contains(d - w[j]))
                    ++tagged;
        }
        if (tagged < support.size())
            return false;
    }
    return true;
}

OracleCache::OracleCache(std::int64_t fano_index, OracleOptions options)
    : fano_index_(fano_index), options_(options)
{
}

std::optional<Verdict> OracleCache::lookup(const WeightVector& w) const
{
    std::shared_lock lock(mutex_);
    auto it = cache_.find(w);
    if (it == cache_.end())
        return std::nullopt;
    return it->second;
}

void OracleCache::insert(const WeightVector& w, Verdict v)
{
    std::unique_lock lock(mutex_);
    cache_.insert_or_assign(w, v);
}

Verdict OracleCache::operator()(const WeightVector& w)
{
    if (auto hit = lookup(w))
        return *hit;
    const auto v = classify(w, fano_index_, options_).verdict;
    ++evaluations_;
    insert(w, v);
    return v;
}

std::size_t OracleCache::size() const
{
    std::shared_lock lock(mutex_);
    return cache_.size();
}

}  // namespace fano
