#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using relief::cli::Options;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run relief_cmd(std::vector<std::string> args) {
    args.insert(args.begin(), "relief");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = relief::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

Options parsed(std::vector<std::string> args) {
    CLI::App app;
    Options o;
    relief::cli::configure(app, o);
    args.insert(args.begin(), "relief");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("relief-cli-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("training flag defaults are the published settings") {
    const auto o = parsed({"train", "--method", "dl-vfa", "--instance", "districts-1", "--out", "x.json"});
    const auto& c = o.train.config;
    struct Row {
        const char* name;
        double actual;
        double expected;
    };
    const Row rows[] = {
        {"initial epsilon", c.epsilon0, 0.2},
        {"epsilon decay", c.epsilon_decay, 0.98},
        {"initial alpha", c.alpha0, 0.2},
        {"alpha decay", c.alpha_decay, 0.99},
        {"buffer size", static_cast<double>(c.buffer_size), 1000},
        {"update frequency", static_cast<double>(c.update_every), 10},
        {"discount", c.discount, 0.9},
        {"learning rate", c.learning_rate, 0.001},
        {"batch size", static_cast<double>(c.batch_size), 256},
        {"training time limit", c.time_cap_seconds, 14400},
        {"hidden layers", static_cast<double>(c.hidden.size()), 2},
        {"first hidden width", static_cast<double>(c.hidden.at(0)), 16},
        {"second hidden width", static_cast<double>(c.hidden.at(1)), 16},
    };
    for (const auto& r : rows) {
        INFO(r.name);
        CHECK(r.actual == r.expected);
    }
    const auto b = parsed({"bench", "--instance", "districts-1"});
    CHECK(b.bench.epoch_time_limit == 900.0);

    const auto custom = parsed({"train", "--method", "nn-vfa", "--instance", "districts-1", "--out", "x.json",
                                "--hidden", "8,4", "--epsilon", "0.5", "--batch-size", "32"});
    CHECK(custom.train.config.hidden == std::vector<int>{8, 4});
    CHECK(custom.train.config.epsilon0 == 0.5);
    CHECK(custom.train.config.batch_size == 32);
}

TEST_CASE("instance command") {
    TempDir dir;
    auto list = relief_cmd({"instance", "list"});
    CHECK(list.code == 0);
    CHECK(list.out.find("nepal") != std::string::npos);

    CHECK(relief_cmd({"instance", "export", "districts-3", dir / "d3.json"}).code == 0);
    auto ok = relief_cmd({"instance", "validate", dir / "d3.json"});
    CHECK(ok.code == 0);
    CHECK(ok.out.rfind("OK", 0) == 0);
    CHECK(fs::exists(dir / "d3.json.manifest.json"));

    std::ofstream(dir / "bad.json") << "{\"name\": \"x\", \"horizon\": \"thirty\"}";
    auto bad = relief_cmd({"instance", "validate", dir / "bad.json"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("horizon") != std::string::npos);

    CHECK(relief_cmd({"instance", "export", "atlantis", dir / "x.json"}).code == 2);
    CHECK(relief_cmd({"instance", "frobnicate"}).code == 2);
    CHECK(relief_cmd({"bench", "--no-such-flag"}).code == 2);
}

TEST_CASE("train, bench and trace round trip") {
    TempDir dir;
    const std::vector<std::string> train = {"train", "--method", "dl-vfa", "--instance", "districts-1", "--episodes",
                                            "10", "--seed", "3", "--buffer", "20", "--curve-paths", "2"};
    auto with_out = [&](std::vector<std::string> base, const std::string& out) {
        base.push_back("--out");
        base.push_back(out);
        return base;
    };
    REQUIRE(relief_cmd(with_out(train, dir / "a.json")).code == 0);
    REQUIRE(relief_cmd(with_out(train, dir / "b.json")).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.json.curve.csv") == slurp(dir / "b.json.curve.csv"));
    CHECK(slurp(dir / "a.json.curve.csv").rfind("episode,mean_cost,ci95_low,ci95_high\n", 0) == 0);

    const auto manifest = nlohmann::json::parse(slurp(dir / "a.json.manifest.json"));
    CHECK(manifest["command"] == "train");
    CHECK(manifest["outputs"].size() == 2);
    CHECK(manifest["seeds"]["master"] == 3);
    CHECK(manifest["truncated"] == false);
    CHECK(manifest["config"]["training"]["epsilon0"] == 0.2);

    SUBCASE("truncated training exits with 4 and still writes") {
        auto capped = with_out(train, dir / "c.json");
        capped.insert(capped.end(), {"--time-cap", "1e-6"});
        CHECK(relief_cmd(capped).code == 4);
        CHECK(fs::exists(dir / "c.json"));
        CHECK(nlohmann::json::parse(slurp(dir / "c.json.manifest.json"))["truncated"] == true);
    }
    SUBCASE("bench is reproducible and needs checkpoints") {
        const std::vector<std::string> bench = {"bench", "--instance", "districts-1", "--policies", "rule-based,dl-vfa",
                                                "--checkpoints", dir / "a.json", "--paths", "4", "--seed", "9"};
        REQUIRE(relief_cmd(with_out(bench, dir / "r1.csv")).code == 0);
        REQUIRE(relief_cmd(with_out(bench, dir / "r2.csv")).code == 0);
        CHECK(slurp(dir / "r1.csv") == slurp(dir / "r2.csv"));
        CHECK(fs::exists(dir / "r1.csv.manifest.json"));
        auto missing = relief_cmd({"bench", "--instance", "districts-1", "--policies", "nn-vfa", "--paths", "4", "--out",
                                   dir / "x.csv"});
        CHECK(missing.code == 2);
        CHECK(missing.err.find("checkpoint") != std::string::npos);
        CHECK(relief_cmd({"bench", "--instance", "districts-3", "--policies", "dl-vfa", "--checkpoints",
                          dir / "a.json", "--out", dir / "x.csv"})
                  .code == 2);
    }
    SUBCASE("no variability gives zero spread") {
        REQUIRE(relief_cmd({"instance", "export", "districts-1", dir / "d1.json"}).code == 0);
        auto doc = nlohmann::json::parse(slurp(dir / "d1.json"));
        doc["cov"] = 0.0;
        doc["supply_cov"] = 0.0;
        std::ofstream(dir / "flat.json") << doc.dump();
        REQUIRE(relief_cmd({"bench", "--instance", dir / "flat.json", "--paths", "10", "--out", dir / "flat.csv"}).code ==
                0);
        std::istringstream lines(slurp(dir / "flat.csv"));
        std::string header, row;
        std::getline(lines, header);
        std::getline(lines, row);
        std::vector<std::string> fields;
        std::istringstream cells(row);
        for (std::string f; std::getline(cells, f, ',');) fields.push_back(f);
        REQUIRE(fields.size() == 13);
        CHECK(fields[0] == "rule-based");
        CHECK(fields[2] == "0");  // std_total
    }
    SUBCASE("traces") {
        CHECK(relief_cmd({"trace", "--kind", "heatmap", "--instance", "districts-1", "--out", dir / "h.csv"}).code == 0);
        CHECK(slurp(dir / "h.csv").rfind("district,epoch,deprivation_cost\n", 0) == 0);
        CHECK(relief_cmd({"trace", "--kind", "allocations", "--instance", "districts-1", "--policy", "dl-vfa",
                          "--checkpoint", dir / "a.json", "--paths", "3", "--out", dir / "al.csv"})
                  .code == 0);
        CHECK(slurp(dir / "al.csv").rfind("epoch,uav,truck\n", 0) == 0);
        CHECK(relief_cmd({"trace", "--kind", "surface", "--instance", "districts-1", "--checkpoint", dir / "a.json",
                          "--epochs", "0,15", "--inventories", "0,500", "--out", dir / "s.csv"})
                  .code == 0);
        const auto surface = slurp(dir / "s.csv");
        CHECK(std::count(surface.begin(), surface.end(), '\n') == 5);
        CHECK(relief_cmd({"trace", "--kind", "surface", "--instance", "districts-1", "--out", dir / "s2.csv"}).code == 2);
        CHECK(relief_cmd({"trace", "--kind", "bogus", "--instance", "districts-1"}).code == 2);
    }
}
