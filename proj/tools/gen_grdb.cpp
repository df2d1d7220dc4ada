// Regenerates the seed list: quasismooth, well-formed, terminal hypersurfaces
// X_d in P(a_1..a_6) of Fano index 1, up to a degree bound.
//
// Candidates come from the necessary pointer condition of quasismoothness: for
// every i, a_i | d or a_i | d - a_j for some j != i. Weights are placed largest
// first. A weight that divides neither d nor d - a_j for a larger a_j must be
// served by a smaller weight, and the only possibility is the value d mod a_i;
// such required values are kept in `pending`. Every candidate is then checked
// with the full oracle.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

#include "fano/oracle.hpp"

namespace {

using fano::Verdict;
using i64 = std::int64_t;

struct Generator {
    i64 d = 0;
    std::vector<std::vector<i64>> divisors;  // divisors[n], ascending
    std::vector<i64> placed;                 // descending
    std::vector<i64> pending;                // required smaller values (a set)
    std::vector<std::array<i64, 6>> candidates;

    explicit Generator(i64 d_max) : divisors(static_cast<std::size_t>(d_max) + 1)
    {
        for (i64 k = 1; k <= d_max; ++k)
            for (i64 n = k; n <= d_max; n += k)
                divisors[static_cast<std::size_t>(n)].push_back(k);
    }

    bool served_above(i64 w) const
    {
        if (d % w == 0)
            return true;
        for (auto a : placed)
            if (a < d && (d - a) % w == 0)
                return true;
        return false;
    }

    void leaf()
    {
        std::array<i64, 6> a{};
        std::reverse_copy(placed.begin(), placed.end(), a.begin());
        candidates.push_back(a);
    }

    void add_divisors_in(i64 n, i64 lo, i64 hi, std::vector<i64>& out) const
    {
        if (n <= 0 || n >= static_cast<i64>(divisors.size()))
            return;
        const auto& ds = divisors[static_cast<std::size_t>(n)];
        for (auto it = std::lower_bound(ds.begin(), ds.end(), lo); it != ds.end() && *it <= hi; ++it)
            out.push_back(*it);
    }

    // Place w, then recurse. Returns silently when w cannot be completed.
    void place(i64 w, int c, i64 rem)
    {
        const auto saved = pending;
        std::erase(pending, w);
        if (!served_above(w)) {
            const auto t = d % w;
            if (std::find(pending.begin(), pending.end(), t) == pending.end())
                pending.push_back(t);
        }
        const int left = c - 1;
        const auto r = rem - w;
        i64 psum = 0, pmax = 0;
        for (auto p : pending) {
            psum += p;
            pmax = std::max(pmax, p);
        }
        const bool ok = static_cast<int>(pending.size()) <= left && pmax <= w &&
                        psum + (left - static_cast<i64>(pending.size())) <= r &&
                        r <= static_cast<i64>(left) * w && (left > 0 || r == 0);
        if (ok) {
            placed.push_back(w);
            if (left == 0)
                leaf();
            else
                level(left, r, w);
            placed.pop_back();
        }
        pending = saved;
    }

    void level(int c, i64 rem, i64 prev)
    {
        i64 pmax = 0, psum = 0;
        for (auto p : pending) {
            pmax = std::max(pmax, p);
            psum += p;
        }
        const i64 lo = std::max<i64>({(rem + c - 1) / c, pmax, 1});
        const i64 hi = std::min(prev, rem - (c - 1));
        if (lo > hi)
            return;
        const auto np = static_cast<int>(pending.size());

        if (c == 1) {
            place(rem, c, rem);
            return;
        }
        if (np == c) {
            place(pmax, c, rem);
            return;
        }
        if (np <= c - 3) {
            for (i64 w = hi; w >= lo; --w)
                place(w, c, rem);
            return;
        }

        std::vector<i64> cand;
        if (pmax >= lo && pmax <= hi)
            cand.push_back(pmax);
        if (np == c - 1) {
            // remaining positions hold exactly the pending values
            const auto w = rem - psum;
            if (w >= lo && w <= hi)
                cand.push_back(w);
        } else {
            // np == c - 2: w is served (above, or by a pending value), or its new
            // target fills the last free slot, so w + (d mod w) = rem - psum.
            add_divisors_in(d, lo, hi, cand);
            for (auto a : placed)
                add_divisors_in(d - a, lo, hi, cand);
            for (auto p : pending)
                add_divisors_in(d - p, std::max(lo, p + 1), hi, cand);
            const auto x = rem - psum;
            if (x == d) {
                for (i64 w = std::max(lo, d / 2 + 1); w <= hi; ++w)
                    cand.push_back(w);
            }
            for (i64 q = 2; q <= d / lo; ++q) {
                if ((d - x) <= 0 || (d - x) % (q - 1) != 0)
                    continue;
                const auto w = (d - x) / (q - 1);
                if (w >= lo && w <= hi && d / w == q)
                    cand.push_back(w);
            }
        }
        std::sort(cand.begin(), cand.end(), std::greater<>());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        for (auto w : cand)
            place(w, c, rem);
    }

    std::vector<std::array<i64, 6>> run(i64 degree)
    {
        d = degree;
        candidates.clear();
        placed.clear();
        pending.clear();
        level(6, d + 1, d);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        return candidates;
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generate the quasismooth terminal seed list for Fano 4-fold hypersurfaces"};
    i64 d_max = 4000;
    std::string out_path = "data/grdb_snapshot.csv";
    bool all_quasismooth = false;
    app.add_option("--d-max", d_max, "largest degree searched");
    app.add_option("--out", out_path, "output CSV");
    app.add_flag("--all-quasismooth", all_quasismooth, "also emit non-terminal quasismooth families");
    CLI11_PARSE(app, argc, argv);

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 3;
    }
    out << "a1,a2,a3,a4,a5,a6\n";

    Generator gen(d_max);
    std::size_t n_candidates = 0, n_rows = 0;
    i64 last_degree = 0;
    for (i64 d = 5; d <= d_max; ++d) {
        for (const auto& a : gen.run(d)) {
            ++n_candidates;
            const fano::WeightVector w(std::span<const i64>(a.data(), a.size()));
            const auto v = fano::classify_degree(w, d).verdict;
            const bool keep = v == Verdict::terminal_quasismooth ||
                              (all_quasismooth && v != Verdict::not_well_formed &&
                               fano::is_quasismooth(w, d));
            if (!keep)
                continue;
            out << a[0] << ',' << a[1] << ',' << a[2] << ',' << a[3] << ',' << a[4] << ','
                << a[5] << '\n';
            ++n_rows;
            last_degree = d;
        }
        if (d % 250 == 0)
            std::cerr << "d=" << d << " rows=" << n_rows << "\n";
    }
    std::cerr << "candidates " << n_candidates << ", rows " << n_rows << ", largest degree " << last_degree << "\n";
    return 0;
}
