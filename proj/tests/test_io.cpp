#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fano/io.hpp"

using namespace fano;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("fano_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    static int& counter()
    {
        static int n = 0;
        return n;
    }
};

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const std::string& stdout_path)
{
    const std::string cmd = std::string(FANO_CLI_PATH) + " " + args + " > " + stdout_path + " 2>" +
                            stdout_path + ".err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string strip_timestamps(const std::string& jsonl)
{
    std::stringstream in(jsonl), out;
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        j.erase("timestamp");
        out << j.dump() << "\n";
    }
    return out.str();
}

SearchRecord sample_record()
{
    SearchRecord r;
    r.weights = {1, 15, 32, 139, 340, 494};
    r.degree = 1020;
    r.verdict = Verdict::terminal_nonquasismooth;
    r.step = 123;
    r.priority = 0.3125;
    r.run_id = "t1";
    r.engine = "fixed";
    return r;
}

const char* small_seeds = "a1,a2,a3,a4,a5,a6\n1,1,1,1,1,1\n1,1,2,2,2,3\n1,1,1,2,2,2\n";

}  // namespace

TEST_CASE("config: full schema parses")
{
    const auto c = parse_config(R"(
engine = "dynamic"
dimension = 4
fano_index = 1
run_id = "d1"
threads = 2

[search]
s_max = 1000
seeds = "seeds.csv"
expected_seed_rows = 11617
seed_limit = 200
seed_sample = 9

[dynamic]
gamma = 0.5
sigma = 1.5
r_reward = 2.0
learning_rate = 0.01
hidden = 16
slope = 0.02
input_scale = 50.0
rng_seed = 7
zero_output_init = true
sibling_reward = "previous"

[output]
records = "r.jsonl"
telemetry = "t.jsonl"
metadata = "m.json"
cache = "c.csv"
)");
    CHECK(c.engine == "dynamic");
    CHECK(c.threads == 2);
    CHECK(c.s_max == 1000);
    CHECK(c.expected_seed_rows == 11617u);
    CHECK(c.seed_limit == 200);
    CHECK(c.seed_sample == 9u);
    CHECK(c.gamma == 0.5);
    CHECK(c.hidden == 16);
    CHECK(c.rng_seed == 7u);
    CHECK(c.zero_output_init);
    CHECK(c.sibling_reward == SiblingReward::previous);
    CHECK(c.cache_path == "c.csv");
    CHECK_NOTHROW(validate(c));
    const auto d = dynamic_options(c);
    CHECK(d.s_max == 1000);
    CHECK(d.sigma == 1.5);
    CHECK(d.input_scale == 50.0);
    CHECK(d.run_id == "d1");
    CHECK(to_json(c)["dynamic"]["rng_seed"] == 7);
}

TEST_CASE("config: errors")
{
    CHECK_THROWS_AS(parse_config("engine = \"fixed\"\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[search]\ns_max = \"ten\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[search]\ns_max = -4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("engine = \n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[dynamic]\nsibling_reward = \"later\"\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);

    auto ok_fixed = parse_config("engine = \"fixed\"\n[search]\ns_max = 5\nseeds = \"s.csv\"\n");
    CHECK_NOTHROW(validate(ok_fixed));

    CHECK_THROWS_AS(validate(parse_config("engine = \"bfs\"\n")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("engine = \"exhaustive\"\n")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("engine = \"fixed\"\n[search]\ns_max = 5\n")), ConfigError);
    CHECK_THROWS_AS(validate(parse_config("engine = \"fixed\"\n[search]\nseeds = \"s.csv\"\n")),
                    ConfigError);
    const std::string dyn = "engine = \"dynamic\"\n[search]\ns_max = 5\nseeds = \"s.csv\"\n";
    CHECK_THROWS_AS(validate(parse_config(dyn)), ConfigError);  // rng_seed is mandatory
    CHECK_NOTHROW(validate(parse_config(dyn + "[dynamic]\nrng_seed = 1\n")));
    CHECK_THROWS_AS(validate(parse_config(dyn + "[dynamic]\nrng_seed = 1\ngamma = 1.0\n")),
                    ConfigError);
    CHECK_THROWS_AS(validate(parse_config(dyn + "[dynamic]\nrng_seed = 1\nsigma = -1.0\n")),
                    ConfigError);
    CHECK_THROWS_AS(validate(parse_config("engine = \"exhaustive\"\ndimension = 7\n[exhaustive]\nd_max = 3\n")),
                    ConfigError);
}

TEST_CASE("records: JSON layout and round trip")
{
    const auto r = sample_record();
    const auto j = to_json(r);
    CHECK(j.dump().rfind(R"({"weights":[1,15,32,139,340,494],"degree":1020,"verdict":"terminal_nonqs","step":123,)", 0) == 0);
    CHECK(record_from_json(nlohmann::json::parse(j.dump())) == r);

    TempDir dir;
    const auto path = dir / "r.jsonl";
    std::vector<SearchRecord> written;
    {
        JsonlWriter w(path);
        for (int i = 0; i < 5; ++i) {
            auto x = r;
            x.step = static_cast<std::uint64_t>(i);
            x.priority = 1.0 / 3.0 + i;
            w.write(x);
            written.push_back(x);
        }
    }
    const auto back = read_records(path);
    REQUIRE(back.size() == 5);
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].timestamp.size() == 24);
        CHECK(back[i].timestamp.back() == 'Z');
        auto x = back[i];
        x.timestamp.clear();
        CHECK(x == written[i]);
    }
    {
        JsonlWriter w(path, true);
        w.write(r);
    }
    CHECK(read_records(path).size() == 6);
}

TEST_CASE("records: malformed lines name the line")
{
    TempDir dir;
    const auto path = dir / "bad.jsonl";
    write_file(path, to_json(sample_record()).dump() + "\n{\"weights\":[1,2],\"degree\":2}\n");
    try {
        read_records(path);
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(".jsonl:2:") != std::string::npos);
    }
    write_file(path, R"({"weights":[3,2,1],"degree":5,"verdict":"non_terminal","step":0,"priority":0,"run_id":"","engine":""})");
    CHECK_THROWS_AS(read_records(path), std::invalid_argument);
    CHECK_THROWS_AS(read_records(dir / "missing.jsonl"), IoError);
}

TEST_CASE("snapshot loading")
{
    TempDir dir;
    const auto path = dir / "s.csv";
    write_file(path, "a1,a2,a3,a4,a5,a6\n1,10,31,143,337,490\n1,1,1,1,1,1\n");
    const auto s = load_grdb_snapshot(path);
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[0] == WeightVector{1, 10, 31, 143, 337, 490});
    CHECK(s.checksum == fnv1a64(read_file(path)));

    std::string warning;
    CHECK(load_grdb_snapshot(path, 3, false, &warning).rows.size() == 2);
    CHECK(warning.find("3") != std::string::npos);
    CHECK_THROWS_AS(load_grdb_snapshot(path, 3, true), std::invalid_argument);
    CHECK_NOTHROW(load_grdb_snapshot(path, 2, true));

    write_file(path, "");
    CHECK_THROWS_AS(load_grdb_snapshot(path), IoError);
    CHECK_THROWS_AS(load_grdb_snapshot(dir / "missing.csv"), IoError);

    write_file(path, "a1,a2,a3,a4,a5,a6\n1,1,1,1,1,1\n1,2,x,4,5,6\n");
    try {
        load_grdb_snapshot(path);
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(".csv:3:") != std::string::npos);
    }
    write_file(path, "a1,a2,a3,a4,a5,a6\n1,1,1,1,1,1\n5,4,3,2,1,1\n");
    CHECK_THROWS_AS(load_grdb_snapshot(path), std::invalid_argument);
    write_file(path, "b1,b2\n1,1\n");
    CHECK_THROWS_AS(load_grdb_snapshot(path), std::invalid_argument);
    write_file(path, "a1,a2,a3,a4,a5,a6\n1,1,1,1,1\n");
    CHECK_THROWS_AS(load_grdb_snapshot(path), std::invalid_argument);
}

TEST_CASE("verify_grdb flags a perturbed row")
{
    const Oracle oracle = [](const WeightVector& w) { return classify(w).verdict; };
    std::vector<WeightVector> rows{{1, 1, 1, 1, 1, 1}, {1, 1, 2, 2, 2, 3}, {1, 10, 31, 143, 337, 490}};
    const auto good = verify_grdb(rows, oracle);
    CHECK(good.total == 3);
    CHECK(good.all_terminal_quasismooth());
    CHECK(good.counts.at(Verdict::terminal_quasismooth) == 3);

    // a2 -> 2 leaves four even weights and an odd degree: X contains that P^3
    rows[1] = {1, 2, 2, 2, 2, 3};
    const auto bad = verify_grdb(rows, oracle);
    REQUIRE(bad.mismatches.size() == 1);
    CHECK(bad.mismatches[0].first == rows[1]);
    CHECK(bad.mismatches[0].second == Verdict::not_well_formed);

    const auto none = verify_grdb({}, oracle);
    CHECK(none.total == 0);
    CHECK(none.all_terminal_quasismooth());
}

TEST_CASE("oracle cache persistence")
{
    TempDir dir;
    OracleCache a;
    a({1, 15, 32, 139, 340, 494});
    a({1, 1, 2, 2, 2, 3});
    a({1, 2, 2, 2, 2, 3});
    save_cache(a, dir / "c.csv");
    OracleCache b;
    CHECK(load_cache(b, dir / "c.csv") == 3);
    CHECK(b.lookup({1, 2, 2, 2, 2, 3}) == Verdict::not_well_formed);
    CHECK(b({1, 15, 32, 139, 340, 494}) == Verdict::terminal_nonquasismooth);
    CHECK(b.evaluations() == 0);

    OracleCache other_index(2);
    CHECK_THROWS_AS(load_cache(other_index, dir / "c.csv"), std::invalid_argument);
    write_file(dir / "bad.csv", "# fano_index=1\n1,1,1,maybe\n");
    CHECK_THROWS_AS(load_cache(b, dir / "bad.csv"), std::invalid_argument);
}

TEST_CASE("cli: exhaustive recovers the 95 threefolds")
{
    TempDir dir;
    const auto out = dir / "ex.jsonl";
    REQUIRE(run_cli("exhaustive --dimension 3 --d-max 100 --out " + out, dir / "stdout") == 0);
    const auto recs = read_records(out);
    std::size_t qs = 0;
    for (const auto& r : recs)
        qs += r.verdict == Verdict::terminal_quasismooth;
    CHECK(qs == 95);
    const auto meta = nlohmann::json::parse(read_file(out + ".meta.json"));
    CHECK(meta["code_version"] == std::string(code_version()));
    CHECK(meta["config"]["exhaustive"]["d_max"] == 100);
}

TEST_CASE("cli: exit codes")
{
    TempDir dir;
    write_file(dir / "bad.toml", "engine = \"fixed\"\nunknown_key = 3\n");
    CHECK(run_cli("search-fixed --config " + dir / "bad.toml", dir / "o") == 2);
    CHECK(run_cli("search-dynamic --s-max 10 --seeds " + dir / "s.csv", dir / "o") == 2);
    CHECK(run_cli("search-fixed --s-max 10 --seeds " + dir / "missing.csv", dir / "o") == 3);
    write_file(dir / "s.csv", small_seeds);
    // output directories are created, but not under a regular file
    write_file(dir / "plain", "");
    CHECK(run_cli("search-fixed --s-max 10 --seeds " + dir / "s.csv" + " --out " + dir / "plain/sub/r.jsonl",
                  dir / "o") == 3);
    CHECK(run_cli("search-fixed --s-max 10 --seeds " + dir / "s.csv" + " --out " + dir / "new/sub/r.jsonl",
                  dir / "o") == 0);
    CHECK(std::filesystem::exists(dir / "new/sub/r.jsonl"));
    CHECK(run_cli("search-fixed --s-max 10 --dimension 3 --seeds " + dir / "s.csv", dir / "o") == 2);

    CHECK(run_cli("verify-grdb --snapshot " + dir / "s.csv", dir / "o") == 0);
    write_file(dir / "p.csv", "a1,a2,a3,a4,a5,a6\n1,1,1,1,1,1\n1,2,2,2,2,3\n");
    CHECK(run_cli("verify-grdb --snapshot " + dir / "p.csv", dir / "o") == 1);
    CHECK(run_cli("verify-grdb --snapshot " + dir / "s.csv" + " --expected-rows 5 --strict", dir / "o") == 3);
}

TEST_CASE("cli: dynamic replay and warm cache")
{
    TempDir dir;
    write_file(dir / "s.csv", small_seeds);
    write_file(dir / "run.toml", "engine = \"dynamic\"\nrun_id = \"replay\"\n[search]\ns_max = 300\nseeds = \"" +
                                     dir / "s.csv" + "\"\n[dynamic]\nrng_seed = 11\n[output]\ncache = \"" +
                                     dir / "cache.csv" + "\"\n");
    REQUIRE(run_cli("search-dynamic --config " + dir / "run.toml" + " --out " + dir / "a.jsonl", dir / "o1") == 0);
    REQUIRE(run_cli("search-dynamic --config " + dir / "run.toml" + " --out " + dir / "b.jsonl", dir / "o2") == 0);
    const auto a = read_file(dir / "a.jsonl");
    CHECK_FALSE(a.empty());
    CHECK(strip_timestamps(a) == strip_timestamps(read_file(dir / "b.jsonl")));

    const auto cold = nlohmann::json::parse(read_file(dir / "o1"));
    const auto warm = nlohmann::json::parse(read_file(dir / "o2"));
    CHECK(cold["records"] == warm["records"]);
    CHECK(warm["oracle_evaluations"].get<std::uint64_t>() < cold["oracle_evaluations"].get<std::uint64_t>());

    // the metadata alone is enough to replay the run
    const auto meta = nlohmann::json::parse(read_file(dir / "a.jsonl.meta.json"));
    const auto cfg = meta["config"];
    std::ostringstream toml;
    toml << "engine = \"dynamic\"\nrun_id = " << cfg["run_id"] << "\n[search]\ns_max = "
         << cfg["search"]["s_max"] << "\nseeds = " << cfg["search"]["seeds"] << "\n[dynamic]\nrng_seed = "
         << meta["rng_seed"] << "\ngamma = " << cfg["dynamic"]["gamma"] << "\nsigma = "
         << cfg["dynamic"]["sigma"] << "\ninput_scale = " << meta["input_scale"] << "\n";
    write_file(dir / "replay.toml", toml.str());
    REQUIRE(run_cli("search-dynamic --config " + dir / "replay.toml" + " --out " + dir / "c.jsonl", dir / "o3") == 0);
    CHECK(strip_timestamps(a) == strip_timestamps(read_file(dir / "c.jsonl")));
}

TEST_CASE("cli: analyze and export")
{
    TempDir dir;
    write_file(dir / "s.csv", small_seeds);
    REQUIRE(run_cli("search-fixed --s-max 400 --seeds " + dir / "s.csv" + " --out " + dir / "f.jsonl", dir / "o") == 0);
    REQUIRE(run_cli("search-dynamic --s-max 400 --seed 3 --seeds " + dir / "s.csv" + " --out " + dir / "d.jsonl",
                    dir / "o") == 0);
    REQUIRE(run_cli("analyze --fixed " + dir / "f.jsonl" + " --dynamic " + dir / "d.jsonl" + " --seeds " +
                        dir / "s.csv" + " --out-dir " + dir / "an",
                    dir / "o") == 0);
    const auto summary = nlohmann::json::parse(read_file(dir / "an/summary.json"));
    CHECK(summary.contains("fixed_only"));
    CHECK(read_file(dir / "an/fixed_only_hist.csv").rfind("distance,count\n", 0) == 0);

    REQUIRE(run_cli("export-plot-data --records " + dir / "f.jsonl" + " " + dir / "d.jsonl" + " --out-dir " +
                        dir / "plots",
                    dir / "o") == 0);
    CHECK(fs::exists(dir / "plots/points.csv"));
    CHECK(fs::exists(dir / "plots/cumulative_by_degree.csv"));
    CHECK(fs::exists(dir / "plots/reward_vs_steps.csv"));
}
