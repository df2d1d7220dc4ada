#include "fano/io.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>

#include <toml.hpp>

#ifndef FANO_VERSION
#define FANO_VERSION "0.0.0"
#endif

namespace fano {

std::string_view code_version()
{
    return FANO_VERSION;
}

namespace {

void reject_unknown(const toml::table& t, const std::set<std::string>& allowed,
                    const std::string& where)
{
    for (const auto& [k, v] : t)
        if (!allowed.count(std::string(k.str())))
            throw ConfigError(where + ": unknown key '" + std::string(k.str()) + "'");
}

template <class T>
std::optional<T> get(const toml::table& t, const char* key, const std::string& where)
{
    const auto* node = t.get(key);
    if (!node)
        return std::nullopt;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node->value<double>())
            return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (node->is_boolean())
            return node->value<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (node->is_string())
            return node->value<std::string>();
    } else {
        if (node->is_integer())
            return node->value<T>();
    }
    throw ConfigError(where + "." + key + ": wrong type");
}

template <class T>
void assign(T& field, const toml::table& t, const char* key, const std::string& where)
{
    if (auto v = get<T>(t, key, where))
        field = *v;
}

template <class U, class T>
void assign_unsigned(T& field, const toml::table& t, const char* key, const std::string& where)
{
    if (auto v = get<std::int64_t>(t, key, where)) {
        if (*v < 0)
            throw ConfigError(where + "." + key + ": must be non-negative");
        field = static_cast<U>(*v);
    }
}

const toml::table* section(const toml::table& root, const char* name)
{
    const auto* node = root.get(name);
    if (!node)
        return nullptr;
    if (!node->is_table())
        throw ConfigError(std::string(name) + ": expected a table");
    return node->as_table();
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source)
{
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }

    RunConfig c;
    reject_unknown(root,
                   {"engine", "dimension", "fano_index", "run_id", "threads", "exhaustive",
                    "search", "dynamic", "output"},
                   source);
    assign(c.engine, root, "engine", source);
    assign_unsigned<std::size_t>(c.dimension, root, "dimension", source);
    assign(c.fano_index, root, "fano_index", source);
    assign(c.run_id, root, "run_id", source);
    assign_unsigned<unsigned>(c.threads, root, "threads", source);

    if (const auto* t = section(root, "exhaustive")) {
        reject_unknown(*t, {"d_max"}, "exhaustive");
        assign(c.d_max, *t, "d_max", "exhaustive");
    }
    if (const auto* t = section(root, "search")) {
        reject_unknown(*t,
                       {"s_max", "priority_const", "seeds", "expected_seed_rows", "seed_limit",
                        "seed_sample"},
                       "search");
        assign_unsigned<std::uint64_t>(c.s_max, *t, "s_max", "search");
        assign(c.priority_const, *t, "priority_const", "search");
        assign(c.seeds_path, *t, "seeds", "search");
        if (t->get("expected_seed_rows")) {
            std::size_t n = 0;
            assign_unsigned<std::size_t>(n, *t, "expected_seed_rows", "search");
            c.expected_seed_rows = n;
        }
        assign_unsigned<std::size_t>(c.seed_limit, *t, "seed_limit", "search");
        if (t->get("seed_sample")) {
            std::uint64_t n = 0;
            assign_unsigned<std::uint64_t>(n, *t, "seed_sample", "search");
            c.seed_sample = n;
        }
    }
    if (const auto* t = section(root, "dynamic")) {
        reject_unknown(*t,
                       {"gamma", "sigma", "r_reward", "learning_rate", "hidden", "slope",
                        "input_scale", "rng_seed", "zero_output_init", "sibling_reward"},
                       "dynamic");
        assign(c.gamma, *t, "gamma", "dynamic");
        assign(c.sigma, *t, "sigma", "dynamic");
        assign(c.r_reward, *t, "r_reward", "dynamic");
        assign(c.learning_rate, *t, "learning_rate", "dynamic");
        assign_unsigned<std::size_t>(c.hidden, *t, "hidden", "dynamic");
        assign(c.slope, *t, "slope", "dynamic");
        assign(c.input_scale, *t, "input_scale", "dynamic");
        if (t->get("rng_seed")) {
            std::uint64_t n = 0;
            assign_unsigned<std::uint64_t>(n, *t, "rng_seed", "dynamic");
            c.rng_seed = n;
        }
        assign(c.zero_output_init, *t, "zero_output_init", "dynamic");
        if (auto s = get<std::string>(*t, "sibling_reward", "dynamic")) {
            if (*s == "reset_first")
                c.sibling_reward = SiblingReward::reset_first;
            else if (*s == "previous")
                c.sibling_reward = SiblingReward::previous;
            else
                throw ConfigError("dynamic.sibling_reward: expected reset_first or previous");
        }
    }
    if (const auto* t = section(root, "output")) {
        reject_unknown(*t, {"records", "telemetry", "metadata", "cache"}, "output");
        assign(c.records_path, *t, "records", "output");
        assign(c.telemetry_path, *t, "telemetry", "output");
        assign(c.metadata_path, *t, "metadata", "output");
        assign(c.cache_path, *t, "cache", "output");
    }
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void validate(const RunConfig& c)
{
    if (c.engine != "exhaustive" && c.engine != "fixed" && c.engine != "dynamic")
        throw ConfigError("engine must be exhaustive, fixed or dynamic (got '" + c.engine + "')");
    if (c.dimension < 1 || c.dimension + 2 > max_weights)
        throw ConfigError("dimension must be between 1 and " + std::to_string(max_weights - 2));
    if (c.fano_index < 0)
        throw ConfigError("fano_index must be non-negative");
    if (c.engine == "exhaustive") {
        if (c.d_max < 1)
            throw ConfigError("exhaustive.d_max must be >= 1");
        return;
    }
    if (c.s_max < 1)
        throw ConfigError("search.s_max must be >= 1");
    if (c.seeds_path.empty())
        throw ConfigError("search.seeds is required for the " + c.engine + " engine");
    if (c.seed_sample && c.seed_limit == 0)
        throw ConfigError("search.seed_sample needs search.seed_limit");
    if (c.engine == "dynamic") {
        if (!c.rng_seed)
            throw ConfigError("dynamic.rng_seed is required");
        if (!(c.gamma >= 0 && c.gamma < 1))
            throw ConfigError("dynamic.gamma must be in [0, 1)");
        if (!(c.sigma >= 0))
            throw ConfigError("dynamic.sigma must be >= 0");
        if (!(c.learning_rate > 0))
            throw ConfigError("dynamic.learning_rate must be > 0");
        if (c.hidden < 1)
            throw ConfigError("dynamic.hidden must be >= 1");
        if (!(c.input_scale > 0))
            throw ConfigError("dynamic.input_scale must be > 0");
    }
}

nlohmann::ordered_json to_json(const RunConfig& c)
{
    nlohmann::ordered_json j;
    j["engine"] = c.engine;
    j["dimension"] = c.dimension;
    j["fano_index"] = c.fano_index;
    j["run_id"] = c.run_id;
    j["threads"] = c.threads;
    j["exhaustive"] = {{"d_max", c.d_max}};
    nlohmann::ordered_json search;
    search["s_max"] = c.s_max;
    search["priority_const"] = c.priority_const;
    search["seeds"] = c.seeds_path;
    search["expected_seed_rows"] =
        c.expected_seed_rows ? nlohmann::ordered_json(*c.expected_seed_rows) : nullptr;
    search["seed_limit"] = c.seed_limit;
    search["seed_sample"] = c.seed_sample ? nlohmann::ordered_json(*c.seed_sample) : nullptr;
    j["search"] = search;
    nlohmann::ordered_json dyn;
    dyn["gamma"] = c.gamma;
    dyn["sigma"] = c.sigma;
    dyn["r_reward"] = c.r_reward;
    dyn["learning_rate"] = c.learning_rate;
    dyn["hidden"] = c.hidden;
    dyn["slope"] = c.slope;
    dyn["input_scale"] = c.input_scale;
    dyn["rng_seed"] = c.rng_seed ? nlohmann::ordered_json(*c.rng_seed) : nullptr;
    dyn["zero_output_init"] = c.zero_output_init;
    dyn["sibling_reward"] =
        c.sibling_reward == SiblingReward::previous ? "previous" : "reset_first";
    j["dynamic"] = dyn;
    j["output"] = {{"records", c.records_path},
                   {"telemetry", c.telemetry_path},
                   {"metadata", c.metadata_path},
                   {"cache", c.cache_path}};
    return j;
}

DynamicOptions dynamic_options(const RunConfig& c)
{
    DynamicOptions o;
    o.s_max = c.s_max;
    o.gamma = c.gamma;
    o.sigma = c.sigma;
    o.r_reward = c.r_reward;
    o.learning_rate = c.learning_rate;
    o.hidden = c.hidden;
    o.slope = c.slope;
    o.input_scale = c.input_scale;
    o.rng_seed = c.rng_seed.value_or(0);
    o.zero_output_init = c.zero_output_init;
    o.sibling_reward = c.sibling_reward;
    o.fano_index = c.fano_index;
    o.run_id = c.run_id;
    return o;
}

nlohmann::ordered_json to_json(const SearchRecord& r)
{
    nlohmann::ordered_json j;
    j["weights"] = r.weights.point().to_vector();
    j["degree"] = r.degree;
    j["verdict"] = std::string(to_string(r.verdict));
    j["step"] = r.step;
    j["priority"] = r.priority;
    j["run_id"] = r.run_id;
    j["engine"] = r.engine;
    j["timestamp"] = r.timestamp;
    return j;
}

SearchRecord record_from_json(const nlohmann::json& j)
{
    try {
        SearchRecord r;
        const auto w = j.at("weights").get<std::vector<std::int64_t>>();
        r.weights = WeightVector(std::span<const std::int64_t>(w));
        r.degree = j.at("degree").get<std::int64_t>();
        r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
        r.step = j.at("step").get<std::uint64_t>();
        r.priority = j.at("priority").get<double>();
        r.run_id = j.at("run_id").get<std::string>();
        r.engine = j.at("engine").get<std::string>();
        if (j.contains("timestamp"))
            r.timestamp = j.at("timestamp").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed record: ") + e.what());
    }
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

void ensure_parent_dir(const std::string& path)
{
    const auto dir = std::filesystem::path(path).parent_path();
    if (dir.empty())
        return;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

JsonlWriter::JsonlWriter(const std::string& path, bool append)
    : out_((ensure_parent_dir(path), path), append ? std::ios::app : std::ios::trunc), path_(path)
{
    if (!out_)
        throw IoError("cannot open " + path + " for writing");
}

void JsonlWriter::write(SearchRecord record)
{
    if (record.timestamp.empty())
        record.timestamp = utc_timestamp();
    write(to_json(record));
}

void JsonlWriter::write(const nlohmann::ordered_json& object)
{
    out_ << object.dump() << '\n';
    out_.flush();
    if (!out_)
        throw IoError("write failed on " + path_);
}

std::vector<SearchRecord> read_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path);
    std::vector<SearchRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Snapshot load_grdb_snapshot(const std::string& path, std::optional<std::size_t> expected_rows,
                            bool strict, std::string* warning)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read snapshot " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.empty())
        throw IoError("snapshot " + path + " is empty");

    Snapshot snap;
    snap.checksum = fnv1a64(text);
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0, columns = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (lineno == 1) {
            std::istringstream hs(line);
            std::string cell;
            while (std::getline(hs, cell, ',')) {
                ++columns;
                if (cell != "a" + std::to_string(columns))
                    throw std::invalid_argument(path + ":1: header must be a1,...,am");
            }
            if (columns < 3 || columns > max_weights)
                throw std::invalid_argument(path + ":1: unsupported number of weight columns");
            continue;
        }
        if (line.empty())
            continue;
        std::vector<std::int64_t> w;
        std::istringstream rs(line);
        std::string cell;
        while (std::getline(rs, cell, ',')) {
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cell.size())
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": not an integer: '" + cell + "'");
            w.push_back(v);
        }
        if (w.size() != columns)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(columns) + " columns");
        try {
            snap.rows.emplace_back(std::span<const std::int64_t>(w));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (columns == 0)
        throw IoError("snapshot " + path + " has no header");
    if (expected_rows && snap.rows.size() != *expected_rows) {
        const auto msg = path + ": " + std::to_string(snap.rows.size()) + " rows, expected " +
                         std::to_string(*expected_rows);
        if (strict)
            throw std::invalid_argument(msg);
        if (warning)
            *warning = msg;
    }
    return snap;
}

GrdbReport verify_grdb(const std::vector<WeightVector>& rows, const Oracle& oracle)
{
    GrdbReport rep;
    rep.total = rows.size();
    for (const auto& w : rows) {
        const auto v = oracle(w);
        ++rep.counts[v];
        if (v != Verdict::terminal_quasismooth)
            rep.mismatches.emplace_back(w, v);
    }
    return rep;
}

void save_cache(const OracleCache& cache, const std::string& path)
{
    std::vector<std::pair<WeightVector, Verdict>> entries;
    cache.for_each([&](const WeightVector& w, Verdict v) { entries.emplace_back(w, v); });
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write cache " + path);
    out << "# fano_index=" << cache.fano_index() << '\n';
    for (const auto& [w, v] : entries) {
        for (auto a : w)
            out << a << ',';
        out << to_string(v) << '\n';
    }
    if (!out)
        throw IoError("write failed on " + path);
}

std::size_t load_cache(OracleCache& cache, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read cache " + path);
    std::string line;
    std::size_t lineno = 0, n = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const std::string key = "# fano_index=";
            if (line.rfind(key, 0) == 0 && std::stoll(line.substr(key.size())) != cache.fano_index())
                throw std::invalid_argument(path + ": cache built for another Fano index");
            continue;
        }
        const auto cut = line.rfind(',');
        if (cut == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": malformed entry");
        std::vector<std::int64_t> w;
        std::istringstream rs(line.substr(0, cut));
        std::string cell;
        try {
            while (std::getline(rs, cell, ','))
                w.push_back(std::stoll(cell));
            cache.insert(WeightVector(std::span<const std::int64_t>(w)),
                         verdict_from_string(line.substr(cut + 1)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ++n;
    }
    return n;
}

}  // namespace fano
