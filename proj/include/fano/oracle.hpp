#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fano/lattice.hpp"
#include "fano/semigroup.hpp"

namespace fano {

enum class Verdict : std::uint8_t {
    not_well_formed,
    non_terminal,
    terminal_quasismooth,
    terminal_nonquasismooth,
};

/// Reward points of the search are the terminal verdicts.
constexpr bool is_reward(Verdict v)
{
    return v == Verdict::terminal_quasismooth || v == Verdict::terminal_nonquasismooth;
}

/// Wire names: not_well_formed, non_terminal, terminal_qs, terminal_nonqs.
std::string_view to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

using Exponent = std::vector<std::int64_t>;

enum class SingularityKind : std::uint8_t { quotient, hyperquotient };

/// 1/r(b_1, ..., b_n) or, for hyperquotients, 1/r(b_1, ..., b_{n+1}; e) together with
/// the monomials of the local equation f'.
struct SingularityType {
    std::int64_t r = 1;
    std::vector<std::int64_t> local_weights;
    SingularityKind kind = SingularityKind::quotient;
    std::optional<std::int64_t> equation_residue;
    std::vector<Exponent> local_monomials;
};

struct StratumReport {
    std::vector<int> support;  // indices I with x_j = 0 for j outside I
    int dimension = -1;        // dim of X meeting the open stratum
    SingularityType type;
    bool terminal = true;
    std::string note;
};

struct Classification {
    Verdict verdict = Verdict::not_well_formed;
    bool quasismooth = false;
    std::int64_t degree = 0;
    std::vector<StratumReport> strata;
};

class DegenerateFamily : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MonomialCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    friend bool operator==(const Rational& a, const Rational& b)
    {
        return a.num * b.den == b.num * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b)
    {
        return a.num * b.den < b.num * a.den;
    }
};

/// d = sum(weights) - fano_index. Throws std::invalid_argument if that leaves d < 1.
std::int64_t degree_of(const WeightVector& weights, std::int64_t fano_index);

/// Whether some monomial x_support^M (times x_tag, when given) has weighted degree d.
bool monomial_exists(std::span<const std::int64_t> weights, std::int64_t d,
                     std::span<const int> support, std::optional<int> tag = std::nullopt);

/// All exponent vectors m >= 0 with sum m_i a_i = d, lexicographically descending.
/// Throws MonomialCapExceeded when there are more than `cap`.
std::vector<Exponent> enumerate_monomials(std::span<const std::int64_t> weights,
                                          std::int64_t d, std::size_t cap);

bool is_well_formed(const WeightVector& weights, std::int64_t d);
bool is_quasismooth(const WeightVector& weights, std::int64_t d);

/// Reid-Shepherd-Barron-Tai: sum_i (k b_i mod r) > r for every 1 <= k < r.
bool rst_terminal(const SingularityType& t);

/// Mori's criterion restricted to the unit cube, with the minimum taken over
/// t.local_monomials. Throws DegenerateFamily when r >= 2 and f' has no monomials.
bool mori_terminal_approx(const SingularityType& t);

/// The monomials of the local equation at a general point of the stratum
/// {x_j = 0 : j not in I}, for a hypersurface containing that stratum: exponent
/// vectors N over the transverse variables with d - N.a in <a_i : i in I>.
class LocalEquation {
public:
    LocalEquation(std::span<const std::int64_t> weights, std::int64_t d,
                  std::span<const int> stratum);

    const std::vector<int>& transverse() const { return transverse_; }

    bool admissible(std::int64_t transverse_degree) const;

    /// min over monomials N of sum_j N_j costs[j], costs indexed like transverse().
    /// nullopt when there are no monomials.
    std::optional<std::int64_t> min_cost(std::span<const std::int64_t> costs) const;

    /// Number of monomials, saturating at cap + 1.
    std::uint64_t count(std::uint64_t cap) const;
    std::vector<Exponent> enumerate(std::size_t cap) const;

    /// Monomials of total degree <= max_total plus, per variable, its smallest
    /// admissible pure power. Used to certify criterion inequalities cheaply.
    std::vector<Exponent> sample(int max_total) const;

private:
    std::vector<std::int64_t> transverse_weights_;
    std::vector<int> transverse_;
    std::int64_t d_ = 0;
    NumericalSemigroup stratum_semigroup_;
};

/// min{(1/r) sum m_i residues_i} over the monomials of f on the patch x_patch = 1,
/// i.e. sum m_i a_i = d (mod a_patch) and <= d. `residues` lists the costs of the
/// non-patch variables in index order. Throws DegenerateFamily when infeasible.
Rational local_min_weight(std::int64_t r, std::span<const std::int64_t> residues,
                          std::span<const std::int64_t> weights, std::int64_t d,
                          int patch_index);

struct OracleOptions {
    /// Hyperquotient strata with at most this many local monomials are
    /// evaluated on the explicit list; larger ones go through the DP.
    std::size_t enumeration_cap = 4096;
    /// Fill SingularityType::local_monomials in reports when enumerated.
    bool keep_monomials = false;
    /// Keep analysing strata after the first failure.
    bool full_report = false;
};

Classification classify_degree(const WeightVector& weights, std::int64_t d,
                               const OracleOptions& options = {});
Classification classify(const WeightVector& weights, std::int64_t fano_index = 1,
                        const OracleOptions& options = {});

/// Memoized verdicts keyed by weights, for a fixed Fano index. Reads take a shared
/// lock; inserts are serialized.
class OracleCache {
public:
    explicit OracleCache(std::int64_t fano_index = 1, OracleOptions options = {});

    Verdict operator()(const WeightVector& w);
    std::optional<Verdict> lookup(const WeightVector& w) const;
    void insert(const WeightVector& w, Verdict v);

    std::uint64_t evaluations() const { return evaluations_; }
    std::size_t size() const;
    std::int64_t fano_index() const { return fano_index_; }

    template <class F>
    void for_each(F&& f) const
    {
        std::shared_lock lock(mutex_);
        for (const auto& [w, v] : cache_)
            f(w, v);
    }

private:
    std::int64_t fano_index_;
    OracleOptions options_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<WeightVector, Verdict, PointHash> cache_;
    std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace fano
