#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "saasqual/cli.hpp"
#include "saasqual/persistence.hpp"

namespace fs = std::filesystem;
using saasqual::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("saasqual-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

const char* kSmallCsv =
    "offering_id,user_id,timestamp,reusability,availability,scalability,pay_per_use,customizability,"
    "data_managed_by_providers\n"
    "crm,u1,2024-01-02,8,9,8,7,8,9\n"
    "crm,u2,,7,8,9,8,7,8\n"
    "mail,u1,,3,6,2,4,3,2\n";

}  // namespace

TEST_CASE("validate") {
    TempDir dir;
    write(dir.file("in.csv"), kSmallCsv);
    const auto r = call({"validate", "--input", dir.file("in.csv")});
    CHECK(r.code == 0);
    CHECK(r.out == "ok: 3 records, 2 offerings\n");

    write(dir.file("bad.csv"), std::string(kSmallCsv) + "mail,u2,,3,6,2,4,3,11\n");
    const auto bad = call({"validate", "--input", dir.file("bad.csv")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("row 4") != std::string::npos);

    CHECK(call({"validate", "--input", dir.file("missing.csv")}).code == 2);
}

TEST_CASE("usage errors") {
    TempDir dir;
    write(dir.file("in.csv"), kSmallCsv);
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"fit", "--input", dir.file("in.csv"), "--clusters", "0", "--seed", "1"}).code == 1);
    CHECK(call({"fit", "--input", dir.file("in.csv"), "--clusters", "1"}).code == 1);
    CHECK(call({"evaluate", "--input", dir.file("in.csv")}).code == 1);
    CHECK(call({"evaluate", "--input", dir.file("in.csv"), "--seed", "1", "--clusters", "2", "--auto-k"}).code == 1);
    CHECK(call({"sweep", "--input", dir.file("in.csv"), "--seed", "1", "--k-min", "3", "--k-max", "2"}).code == 1);
    CHECK(call({"synth", "--scenario", "three-tier-sep4", "--out", dir.file("s.csv")}).code == 1);
    CHECK(call({"synth", "--scenario", "nope", "--seed", "1", "--out", dir.file("s.csv")}).code == 1);
    CHECK(call({"fit", "--input", dir.file("in.csv"), "--clusters", "1", "--seed", "1", "--tol", "-1"}).code == 1);
    CHECK(call({"--help"}).code == 0);
}

TEST_CASE("fit writes a model document") {
    TempDir dir;
    write(dir.file("in.csv"), kSmallCsv);
    const auto r = call({"fit", "--input", dir.file("in.csv"), "--clusters", "1", "--seed", "4", "--out",
                         dir.file("model.json")});
    REQUIRE(r.code == 0);
    const auto model = saasqual::model_from_json(saasqual::parse_document(slurp(dir.file("model.json"))));
    CHECK(model.params.weights.size() == 1);
    CHECK(model.config.seed == 4);

    // more clusters than points is a data error
    CHECK(call({"fit", "--input", dir.file("in.csv"), "--clusters", "5", "--seed", "4"}).code == 2);
}

TEST_CASE("synth, evaluate, recommend") {
    TempDir dir;
    const auto csv = dir.file("three.csv");
    REQUIRE(call({"synth", "--scenario", "three-tier-sep4", "--seed", "11", "--out", csv}).code == 0);
    CHECK(fs::exists(dir.file("three.labels.csv")));
    CHECK(call({"validate", "--input", csv}).out == "ok: 60 records, 60 offerings\n");

    const auto base = std::vector<std::string>{"evaluate", "--input", csv, "--auto-k", "--seed", "11", "--k-max", "6"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    REQUIRE(call(with({"--out", dir.file("r1.json"), "--model-out", dir.file("m.json")})).code == 0);
    REQUIRE(call(with({"--out", dir.file("r2.json"), "--threads", "3"})).code == 0);
    const auto r1 = slurp(dir.file("r1.json"));
    CHECK(r1 == slurp(dir.file("r2.json")));
    const auto doc = saasqual::parse_document(r1);
    CHECK(doc.at("model").at("selected_M") == 3);

    // a persisted model regenerates the same report
    REQUIRE(call({"evaluate", "--input", csv, "--model", dir.file("m.json"), "--out", dir.file("r3.json")}).code == 0);
    CHECK(slurp(dir.file("r3.json")) == r1);

    const auto json_out = call(with({"--format", "json"}));
    CHECK(json_out.out == r1);

    const auto rec = call({"recommend", "--input", dir.file("r1.json"), "--weights", "0,1,0,0,0,0", "--top", "60",
                           "--format", "json"});
    REQUIRE(rec.code == 0);
    const auto recs = saasqual::parse_document(rec.out);
    REQUIRE(recs.size() == 60);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        CHECK(recs[i - 1].at("score").get<double>() >= recs[i].at("score").get<double>());
    }
    CHECK(call({"recommend", "--input", dir.file("r1.json"), "--weights", "1,1"}).code == 1);
    CHECK(call({"recommend", "--input", dir.file("r1.json"), "--weights", "0,0,0,0,0,0"}).code == 1);
    CHECK(call({"recommend", "--input", dir.file("r1.json"), "--top", "0"}).code == 1);
    write(dir.file("junk.json"), "{not json");
    CHECK(call({"recommend", "--input", dir.file("junk.json")}).code == 2);

    const auto table = call({"recommend", "--input", dir.file("r1.json"), "--top", "3"});
    CHECK(table.code == 0);
    CHECK(table.out.rfind("rank", 0) == 0);
}

TEST_CASE("sweep on a single blob") {
    TempDir dir;
    REQUIRE(call({"synth", "--scenario", "single-blob", "--seed", "2", "--out", dir.file("blob.csv")}).code == 0);
    const auto r = call({"sweep", "--input", dir.file("blob.csv"), "--seed", "2", "--k-max", "4"});
    REQUIRE(r.code == 0);
    const auto doc = saasqual::parse_document(r.out);
    CHECK(doc.at("selected_M") == 1);
    CHECK(doc.at("entries").size() == 4);
}

TEST_CASE("synth to standard output needs a labels path") {
    TempDir dir;
    CHECK(call({"synth", "--clusters", "2", "--seed", "1"}).code == 1);
    const auto r = call({"synth", "--clusters", "2", "--points", "3", "--seed", "1", "--labels-out", dir.file("l.csv")});
    REQUIRE(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
    CHECK(slurp(dir.file("l.csv")).rfind("row_id,label\n", 0) == 0);
    // means that leave the rating scale are rejected
    CHECK(call({"synth", "--clusters", "4", "--separation", "20", "--seed", "1", "--labels-out", dir.file("l.csv")})
              .code == 1);
}

TEST_CASE("outputs are replaced atomically") {
    TempDir dir;
    write(dir.file("in.csv"), kSmallCsv);
    write(dir.file("model.json"), "old");
    REQUIRE(call({"fit", "--input", dir.file("in.csv"), "--clusters", "2", "--seed", "1", "--out",
                  dir.file("model.json")})
                .code == 0);
    CHECK(slurp(dir.file("model.json")) != "old");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
    CHECK(entries == 2);

    // unwritable destination: nothing left behind
    CHECK(call({"fit", "--input", dir.file("in.csv"), "--clusters", "1", "--seed", "1", "--out",
                dir.file("no/such/dir/model.json")})
              .code == 2);
}
