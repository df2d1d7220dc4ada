// fano: command-line front end for the searches, the oracle and the analysis.
//
// Exit codes: 0 ok, 1 verification failed, 2 invalid config, 3 I/O or input
// format failure, 4 oracle inconsistency.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>

#include "fano/analysis.hpp"
#include "fano/io.hpp"
#include "fano/oracle.hpp"
#include "fano/rl.hpp"
#include "fano/search.hpp"

namespace fs = std::filesystem;
using namespace fano;

namespace {

// normal_distribution output differs between standard libraries, so replays
// are only bit-identical on the same one.
std::string toolchain()
{
#if defined(__clang__)
    std::string s = "clang " __clang_version__;
#elif defined(__GNUC__)
    std::string s = "gcc " __VERSION__;
#else
    std::string s = "unknown compiler";
#endif
#if defined(_LIBCPP_VERSION)
    s += ", libc++ " + std::to_string(_LIBCPP_VERSION);
#elif defined(__GLIBCXX__)
    s += ", libstdc++ " + std::to_string(__GLIBCXX__);
#endif
    return s;
}

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> s_max;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> d_max;
    std::optional<std::size_t> dimension;
    std::optional<unsigned> threads;
    std::optional<std::string> seeds;
    std::optional<std::string> out;
    std::optional<std::string> run_id;
    bool priority_const = false;
};

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "TOML run configuration");
    cmd->add_option("--s-max", o.s_max, "step budget");
    cmd->add_option("--seed", o.seed, "rng seed of the dynamic engine");
    cmd->add_option("--d-max", o.d_max, "largest degree (exhaustive)");
    cmd->add_flag("--priority-const", o.priority_const, "fixed engine with v = 1 (breadth first)");
    cmd->add_option("--dimension", o.dimension, "dimension n of the hypersurfaces");
    cmd->add_option("--threads", o.threads, "worker threads (exhaustive)");
    cmd->add_option("--seeds", o.seeds, "seed CSV (a1..am header)");
    cmd->add_option("--out", o.out, "records JSONL");
    cmd->add_option("--run-id", o.run_id, "run identifier");
}

RunConfig resolve(const Overrides& o, const std::string& engine)
{
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (c.engine.empty())
        c.engine = engine;
    if (c.engine != engine)
        throw ConfigError("config is for the " + c.engine + " engine, not " + engine);
    if (o.s_max)
        c.s_max = *o.s_max;
    if (o.seed)
        c.rng_seed = *o.seed;
    if (o.d_max)
        c.d_max = *o.d_max;
    if (o.dimension)
        c.dimension = *o.dimension;
    if (o.threads)
        c.threads = *o.threads;
    if (o.seeds)
        c.seeds_path = *o.seeds;
    if (o.out)
        c.records_path = *o.out;
    if (o.run_id)
        c.run_id = *o.run_id;
    if (o.priority_const)
        c.priority_const = true;
    validate(c);
    return c;
}

std::vector<WeightVector> load_seeds(const RunConfig& c, nlohmann::ordered_json& meta)
{
    std::string warning;
    auto snap = load_grdb_snapshot(c.seeds_path, c.expected_seed_rows, false, &warning);
    if (!warning.empty())
        std::cerr << "warning: " << warning << "\n";
    auto seeds = std::move(snap.rows);
    for (const auto& s : seeds)
        if (s.size() != c.dimension + 2)
            throw ConfigError("seed " + s.to_string() + " does not match dimension " +
                              std::to_string(c.dimension));
    if (c.seed_limit && c.seed_limit < seeds.size()) {
        if (c.seed_sample) {
            std::mt19937_64 rng(*c.seed_sample);
            std::shuffle(seeds.begin(), seeds.end(), rng);
        }
        seeds.resize(c.seed_limit);
    }
    meta["seeds"] = {{"path", c.seeds_path},
                     {"checksum", snap.checksum},
                     {"rows_used", seeds.size()}};
    return seeds;
}

struct Session {
    RunConfig config;
    OracleCache cache;
    JsonlWriter writer;
    nlohmann::ordered_json meta;

    explicit Session(RunConfig c) : config(std::move(c)), cache(config.fano_index)
    {
        if (!config.cache_path.empty() && fs::exists(config.cache_path)) {
            const auto n = load_cache(cache, config.cache_path);
            std::cerr << "loaded " << n << " cached verdicts\n";
        }
        if (!config.records_path.empty())
            writer = JsonlWriter(config.records_path);
        meta["code_version"] = std::string(code_version());
        meta["toolchain"] = toolchain();
        meta["config"] = to_json(config);
        meta["started"] = utc_timestamp();
    }

    Oracle oracle()
    {
        return [this](const WeightVector& w) { return cache(w); };
    }

    RecordSink sink()
    {
        if (!writer.is_open())
            return {};
        return [this](const SearchRecord& r) { writer.write(r); };
    }

    // Every emitted record is classified again from scratch.
    void recheck(const SearchResult& result)
    {
        for (const auto& r : result.records) {
            const auto v = classify(r.weights, config.fano_index).verdict;
            if (v != r.verdict || !is_reward(v))
                throw OracleInconsistency("record " + r.weights.to_string() + " carries " +
                                          std::string(to_string(r.verdict)) +
                                          " but the oracle now says " +
                                          std::string(to_string(v)));
        }
    }

    void finish(const SearchResult& result)
    {
        std::map<std::string, std::size_t> counts;
        for (const auto& r : result.records)
            ++counts[std::string(to_string(r.verdict))];
        meta["finished"] = utc_timestamp();
        meta["steps"] = result.steps;
        meta["exhausted"] = result.exhausted;
        meta["records"] = result.records.size();
        meta["verdict_counts"] = counts;
        meta["oracle_evaluations"] = cache.evaluations();
        std::string meta_path = config.metadata_path;
        if (meta_path.empty() && !config.records_path.empty())
            meta_path = config.records_path + ".meta.json";
        if (!meta_path.empty()) {
            ensure_parent_dir(meta_path);
            std::ofstream out(meta_path);
            if (!out)
                throw IoError("cannot write " + meta_path);
            out << meta.dump(2) << '\n';
        }
        if (!config.cache_path.empty())
            save_cache(cache, config.cache_path);

        nlohmann::ordered_json summary;
        summary["steps"] = result.steps;
        summary["exhausted"] = result.exhausted;
        summary["records"] = result.records.size();
        summary["verdict_counts"] = counts;
        summary["oracle_evaluations"] = cache.evaluations();
        std::cout << summary.dump() << "\n";
    }
};

int cmd_exhaustive(const Overrides& o)
{
    auto c = resolve(o, "exhaustive");
    Session session(c);
    ExhaustiveOptions opts;
    opts.d_max = c.d_max;
    opts.dimension = c.dimension;
    opts.fano_index = c.fano_index;
    opts.threads = c.threads;
    opts.run_id = c.run_id;
    // classify directly: exhaustive points are never revisited
    const Oracle oracle = [&](const WeightVector& w) {
        return classify(w, c.fano_index).verdict;
    };
    auto result = run_exhaustive(oracle, opts);
    if (session.writer.is_open())
        for (const auto& r : result.records)
            session.writer.write(r);
    session.finish(result);
    return 0;
}

int cmd_fixed(const Overrides& o)
{
    auto c = resolve(o, "fixed");
    Session session(c);
    const auto seeds = load_seeds(c, session.meta);
    FixedOptions opts;
    opts.s_max = c.s_max;
    opts.constant_priority = c.priority_const;
    opts.fano_index = c.fano_index;
    opts.run_id = c.run_id;
    opts.on_record = session.sink();
    auto result = run_fixed(session.oracle(), seeds, opts);
    session.recheck(result);
    session.finish(result);
    return 0;
}

int cmd_dynamic(const Overrides& o)
{
    auto c = resolve(o, "dynamic");
    Session session(c);
    const auto seeds = load_seeds(c, session.meta);
    auto opts = dynamic_options(c);
    opts.on_record = session.sink();
    session.meta["rng_seed"] = opts.rng_seed;
    session.meta["input_scale"] = opts.input_scale;
    session.meta["initialization"] = "uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), mt19937_64(rng_seed)";
    session.meta["priority_noise"] = "std::normal_distribution on the same mt19937_64 stream";
    session.meta["adam"] = {{"learning_rate", opts.learning_rate},
                            {"beta1", 0.9},
                            {"beta2", 0.999},
                            {"epsilon", 1e-8}};
    session.meta["target_copy"] = "every step, before the update";

    JsonlWriter telemetry_out;
    TelemetrySink telemetry;
    if (!c.telemetry_path.empty()) {
        telemetry_out = JsonlWriter(c.telemetry_path);
        telemetry = [&](const Telemetry& t) {
            nlohmann::ordered_json j;
            j["step"] = t.step;
            j["loss"] = t.loss;
            j["s_reward"] = t.s_reward;
            j["queue_size"] = t.queue_size;
            telemetry_out.write(j);
        };
    }
    auto result = run_dynamic(session.oracle(), seeds, opts, telemetry);
    session.recheck(result);
    session.finish(result);
    return 0;
}

int cmd_verify(const std::string& path, std::optional<std::size_t> expected, bool strict,
               const std::string& report_path)
{
    std::string warning;
    const auto snap = load_grdb_snapshot(path, expected, strict, &warning);
    if (!warning.empty())
        std::cerr << "warning: " << warning << "\n";
    const auto rep = verify_grdb(snap.rows, [](const WeightVector& w) {
        return classify(w).verdict;
    });
    nlohmann::ordered_json j;
    j["snapshot"] = path;
    j["checksum"] = snap.checksum;
    j["total"] = rep.total;
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [v, n] : rep.counts)
        counts[std::string(to_string(v))] = n;
    j["counts"] = counts;
    nlohmann::ordered_json bad = nlohmann::ordered_json::array();
    for (const auto& [w, v] : rep.mismatches)
        bad.push_back({{"weights", w.point().to_vector()}, {"verdict", std::string(to_string(v))}});
    j["mismatches"] = bad;
    j["pass"] = rep.all_terminal_quasismooth();
    if (!report_path.empty()) {
        ensure_parent_dir(report_path);
        std::ofstream out(report_path);
        if (!out)
            throw IoError("cannot write " + report_path);
        out << j.dump(2) << '\n';
    }
    j.erase("mismatches");
    j["mismatch_count"] = rep.mismatches.size();
    std::cout << j.dump() << "\n";
    return rep.all_terminal_quasismooth() ? 0 : 1;
}

void write_histogram(const std::string& path, const std::vector<std::int64_t>& distances)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    out << "distance,count\n";
    for (const auto& [d, n] : distance_histogram(distances))
        out << d << ',' << n << '\n';
}

int cmd_analyze(const std::string& fixed_path, const std::string& dynamic_path,
                const std::string& seeds_path, const std::string& out_dir, bool bounds)
{
    const auto fixed_pts = points_of(read_records(fixed_path));
    const auto dynamic_pts = points_of(read_records(dynamic_path));
    std::vector<WeightVector> seeds;
    if (!seeds_path.empty())
        seeds = load_grdb_snapshot(seeds_path).rows;
    fs::create_directories(out_dir);

    const auto part = set_partition(fixed_pts, dynamic_pts);
    auto with_seeds = [&](std::vector<WeightVector> v) {
        v.insert(v.end(), seeds.begin(), seeds.end());
        return v;
    };
    // distance of each engine-exclusive find to everything the other engine saw
    const auto ref_for_dynamic = with_seeds(fixed_pts);
    const auto ref_for_fixed = with_seeds(dynamic_pts);

    nlohmann::ordered_json summary;
    summary["fixed"] = fixed_pts.size();
    summary["dynamic"] = dynamic_pts.size();
    summary["fixed_only"] = part.only_first.size();
    summary["dynamic_only"] = part.only_second.size();
    summary["both"] = part.both.size();

    auto one_side = [&](const char* name, const std::vector<WeightVector>& pts,
                        const std::vector<WeightVector>& ref) {
        std::vector<std::int64_t> dist;
        JsonlWriter out((fs::path(out_dir) / (std::string(name) + "_reachability.jsonl")).string());
        if (!pts.empty() && !ref.empty()) {
            for (const auto& r : nearest_distances(pts, ref)) {
                dist.push_back(r.distance);
                nlohmann::ordered_json j;
                j["weights"] = r.point.point().to_vector();
                j["nearest"] = r.nearest.point().to_vector();
                j["distance"] = r.distance;
                if (bounds) {
                    const auto b = step_bounds(r.nearest, r.distance);
                    j["s_lower"] = b.lower;
                    j["s_upper"] = b.upper;
                    j["p_lower"] = prob_lower_bound(b.lower, b.lower, b.upper);
                }
                out.write(j);
            }
        }
        write_histogram((fs::path(out_dir) / (std::string(name) + "_hist.csv")).string(), dist);
        nlohmann::ordered_json s;
        s["count"] = dist.size();
        if (!dist.empty()) {
            s["p50"] = percentile(dist, 50);
            s["p95"] = percentile(dist, 95);
            s["max"] = *std::max_element(dist.begin(), dist.end());
        }
        summary[std::string(name) + "_distance"] = s;
    };
    one_side("fixed_only", part.only_first, ref_for_fixed);
    one_side("dynamic_only", part.only_second, ref_for_dynamic);

    std::ofstream out(fs::path(out_dir) / "summary.json");
    if (!out)
        throw IoError("cannot write summary in " + out_dir);
    out << summary.dump(2) << '\n';
    std::cout << summary.dump() << "\n";
    return 0;
}

int cmd_export(const std::vector<std::string>& inputs, const std::string& out_dir)
{
    fs::create_directories(out_dir);
    std::ofstream points(fs::path(out_dir) / "points.csv");
    std::ofstream cumulative(fs::path(out_dir) / "cumulative_by_degree.csv");
    std::ofstream rewards(fs::path(out_dir) / "reward_vs_steps.csv");
    if (!points || !cumulative || !rewards)
        throw IoError("cannot write into " + out_dir);

    std::vector<SearchRecord> all;
    for (const auto& in : inputs) {
        auto r = read_records(in);
        all.insert(all.end(), r.begin(), r.end());
    }
    std::size_t m = all.empty() ? 0 : all.front().weights.size();
    for (std::size_t i = 1; i <= m; ++i)
        points << 'a' << i << ',';
    points << "degree,verdict,quasismooth,engine,run_id,step\n";
    for (const auto& r : all) {
        for (auto a : r.weights)
            points << a << ',';
        points << r.degree << ',' << to_string(r.verdict) << ','
               << (r.verdict == Verdict::terminal_quasismooth ? 1 : 0) << ',' << r.engine << ','
               << r.run_id << ',' << r.step << '\n';
    }

    // per engine and run: cumulative counts by degree and by step
    std::map<std::pair<std::string, std::string>, std::vector<const SearchRecord*>> runs;
    for (const auto& r : all)
        runs[{r.engine, r.run_id}].push_back(&r);
    cumulative << "engine,run_id,degree,quasismooth,nonquasismooth\n";
    rewards << "engine,run_id,step,rewards\n";
    for (auto& [key, recs] : runs) {
        std::map<std::int64_t, std::pair<std::size_t, std::size_t>> by_degree;
        for (const auto* r : recs) {
            auto& slot = by_degree[r->degree];
            (r->verdict == Verdict::terminal_quasismooth ? slot.first : slot.second)++;
        }
        std::size_t qs = 0, nqs = 0;
        for (const auto& [d, c] : by_degree) {
            qs += c.first;
            nqs += c.second;
            cumulative << key.first << ',' << key.second << ',' << d << ',' << qs << ',' << nqs
                       << '\n';
        }
        std::stable_sort(recs.begin(), recs.end(),
                         [](const auto* a, const auto* b) { return a->step < b->step; });
        std::size_t n = 0;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            ++n;
            if (i + 1 == recs.size() || recs[i + 1]->step != recs[i]->step)
                rewards << key.first << ',' << key.second << ',' << recs[i]->step << ',' << n
                        << '\n';
        }
    }
    std::cout << "{\"records\":" << all.size() << ",\"runs\":" << runs.size() << "}\n";
    return 0;
}

int cmd_classify(const std::vector<std::int64_t>& weights, std::int64_t index)
{
    const WeightVector w{std::span<const std::int64_t>(weights)};
    OracleOptions opts;
    opts.full_report = true;
    const auto c = classify(w, index, opts);
    nlohmann::ordered_json j;
    j["weights"] = weights;
    j["degree"] = c.degree;
    j["verdict"] = std::string(to_string(c.verdict));
    j["quasismooth"] = c.quasismooth;
    nlohmann::ordered_json strata = nlohmann::ordered_json::array();
    for (const auto& s : c.strata) {
        nlohmann::ordered_json e;
        e["support"] = s.support;
        e["dimension"] = s.dimension;
        e["r"] = s.type.r;
        e["local_weights"] = s.type.local_weights;
        e["kind"] = s.type.kind == SingularityKind::quotient ? "quotient" : "hyperquotient";
        if (s.type.equation_residue)
            e["equation_residue"] = *s.type.equation_residue;
        e["terminal"] = s.terminal;
        e["note"] = s.note;
        strata.push_back(e);
    }
    j["strata"] = strata;
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Search for terminal Fano hypersurfaces in weighted projective space"};
    app.require_subcommand(1);

    Overrides ex, fx, dy;
    auto* exhaustive = app.add_subcommand("exhaustive", "classify every cone point up to a degree");
    add_common(exhaustive, ex);
    auto* fixed = app.add_subcommand("search-fixed", "best-first search with the halving heuristic");
    add_common(fixed, fx);
    auto* dynamic = app.add_subcommand("search-dynamic", "best-first search with the learned heuristic");
    add_common(dynamic, dy);

    std::string snapshot = "data/grdb_snapshot.csv", report;
    std::optional<std::size_t> expected = 11617;
    bool strict = false;
    auto* verify = app.add_subcommand("verify-grdb", "classify every row of the seed snapshot");
    verify->add_option("--snapshot", snapshot, "snapshot CSV");
    verify->add_option("--expected-rows", expected, "expected row count");
    verify->add_flag("--strict", strict, "fail on a row-count mismatch");
    verify->add_option("--report", report, "full JSON report path");

    std::string fixed_in, dynamic_in, seeds_in, out_dir = "analysis";
    bool bounds = false;
    auto* analyze = app.add_subcommand("analyze", "set differences and nearest distances of two runs");
    analyze->add_option("--fixed", fixed_in, "fixed-engine records")->required();
    analyze->add_option("--dynamic", dynamic_in, "dynamic-engine records")->required();
    analyze->add_option("--seeds", seeds_in, "seed CSV shared by both runs");
    analyze->add_option("--out-dir", out_dir, "output directory");
    analyze->add_flag("--bounds", bounds, "also compute the step bounds (slow for large D)");

    std::vector<std::string> export_in;
    std::string export_dir = "plot_data";
    auto* exporter = app.add_subcommand("export-plot-data", "CSV tables for the plotting scripts");
    exporter->add_option("--records", export_in, "records JSONL files")->required();
    exporter->add_option("--out-dir", export_dir, "output directory");

    std::vector<std::int64_t> weights;
    std::int64_t index = 1;
    auto* cls = app.add_subcommand("classify", "oracle verdict with stratum diagnostics");
    cls->add_option("weights", weights, "a_1 <= ... <= a_m")->required();
    cls->add_option("--index", index, "Fano index");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*exhaustive)
            return cmd_exhaustive(ex);
        if (*fixed)
            return cmd_fixed(fx);
        if (*dynamic)
            return cmd_dynamic(dy);
        if (*verify)
            return cmd_verify(snapshot, expected, strict, report);
        if (*analyze)
            return cmd_analyze(fixed_in, dynamic_in, seeds_in, out_dir, bounds);
        if (*exporter)
            return cmd_export(export_in, export_dir);
        if (*cls)
            return cmd_classify(weights, index);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const OracleInconsistency& e) {
        std::cerr << "oracle inconsistency: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
