#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fano/oracle.hpp"
#include "fano/rl.hpp"
#include "fano/search.hpp"

namespace fano {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OracleInconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string_view code_version();

struct RunConfig {
    std::string engine;  // exhaustive | fixed | dynamic
    std::size_t dimension = 4;
    std::int64_t fano_index = 1;
    std::string run_id = "run";
    unsigned threads = 1;

    std::int64_t d_max = 0;

    std::uint64_t s_max = 0;
    bool priority_const = false;
    std::string seeds_path;
    std::optional<std::size_t> expected_seed_rows;
    std::size_t seed_limit = 0;               // 0 keeps every seed
    std::optional<std::uint64_t> seed_sample;  // draw seed_limit seeds with this rng seed

    double gamma = 0.2;
    double sigma = 2.0;
    double r_reward = 1.0;
    double learning_rate = 1e-3;
    std::size_t hidden = 40;
    double slope = 0.01;
    double input_scale = 100.0;
    std::optional<std::uint64_t> rng_seed;
    bool zero_output_init = false;
    SiblingReward sibling_reward = SiblingReward::reset_first;

    std::string records_path;
    std::string telemetry_path;
    std::string metadata_path;
    std::string cache_path;
};

/// Parses a TOML run configuration. Throws ConfigError.
RunConfig parse_config(std::string_view toml_text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Checks engine-specific required fields. Throws ConfigError.
void validate(const RunConfig& config);

nlohmann::ordered_json to_json(const RunConfig& config);
DynamicOptions dynamic_options(const RunConfig& config);

nlohmann::ordered_json to_json(const SearchRecord& record);
/// Throws std::invalid_argument on a malformed record.
SearchRecord record_from_json(const nlohmann::json& j);

/// Creates the directory that will hold `path`. Throws IoError.
void ensure_parent_dir(const std::string& path);

/// One JSON object per line, flushed after every record.
class JsonlWriter {
public:
    JsonlWriter() = default;
    explicit JsonlWriter(const std::string& path, bool append = false);

    bool is_open() const { return out_.is_open(); }
    /// Stamps an empty timestamp with the current UTC time before writing.
    void write(SearchRecord record);
    void write(const nlohmann::ordered_json& object);

private:
    std::ofstream out_;
    std::string path_;
};

/// Throws IoError (unreadable file) or std::invalid_argument with a line number.
std::vector<SearchRecord> read_records(const std::string& path);

std::string utc_timestamp();

struct Snapshot {
    std::vector<WeightVector> rows;
    std::uint64_t checksum = 0;  // FNV-1a 64 over the file bytes
};

/// CSV with header a1..a6 (a1..am in general). Throws IoError when unreadable or
/// empty, std::invalid_argument naming the line of a malformed row, and, when
/// `expected_rows` is set and `strict`, on a row-count mismatch.
Snapshot load_grdb_snapshot(const std::string& path, std::optional<std::size_t> expected_rows = {},
                            bool strict = false, std::string* warning = nullptr);

std::uint64_t fnv1a64(std::string_view bytes);

struct GrdbReport {
    std::size_t total = 0;
    std::map<Verdict, std::size_t> counts;
    std::vector<std::pair<WeightVector, Verdict>> mismatches;  // rows not terminal_qs

    bool all_terminal_quasismooth() const { return mismatches.empty(); }
};

GrdbReport verify_grdb(const std::vector<WeightVector>& rows, const Oracle& oracle);

/// Lines "a1,...,am,verdict", sorted.
void save_cache(const OracleCache& cache, const std::string& path);
/// Returns the number of entries read. Throws IoError / std::invalid_argument.
std::size_t load_cache(OracleCache& cache, const std::string& path);

}  // namespace fano
