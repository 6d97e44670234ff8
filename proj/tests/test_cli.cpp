#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dosskit/cli.hpp"
#include "dosskit/io.hpp"
#include "dosskit/manifest.hpp"
#include "fixtures.hpp"

using namespace dosskit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dosskit");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("dosskit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string manifest_text(const std::vector<SampleRecord>& records) {
  std::ostringstream out;
  write_manifest(out, records);
  return out.str();
}

/// f1 (5000) and f2 (1000) built on r1 (10000).
std::vector<SampleRecord> hand_pool() {
  std::vector<SampleRecord> records;
  for (int i = 0; i < 10000; ++i) records.push_back(testing::real("r" + std::to_string(i), "r1"));
  for (int i = 0; i < 5000; ++i) records.push_back(testing::fake("a" + std::to_string(i), "r1", "f1"));
  for (int i = 0; i < 1000; ++i) records.push_back(testing::fake("b" + std::to_string(i), "r1", "f2"));
  return records;
}

/// A line-oriented output without its '#' provenance header.
std::string payload(const std::string& text) {
  std::string body;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("#")) body += line + "\n";
  }
  return body;
}

}  // namespace

TEST_CASE("validate exit codes") {
  TempDir dir;
  const auto good = dir.file("good.jsonl",
                             manifest_text({testing::real("1", "VCTK"), testing::real("2", "VCTK"),
                                            testing::fake("3", "VCTK", "F5TTS")}));
  auto r = cli({"validate", good});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["ok"] == true);

  const auto bad = dir.file(
      "bad.jsonl",
      "{\"id\":\"1\",\"label\":\"real\",\"source\":\"S\",\"dataset\":\"D\",\"duration_s\":1,\"path\":\"p\"}\n"
      "{\"id\":\"2\",\"label\":\"fake\",\"source\":\"S\",\"dataset\":\"D\",\"duration_s\":1,\"path\":\"p\"}\n");
  r = cli({"validate", bad, "--report", dir.path("report.json")});
  CHECK(r.code == 2);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["errors"].size() == 1);
  CHECK(j["errors"][0]["line"] == 2);
  CHECK(j["errors"][0]["message"].get<std::string>().find("generator") != std::string::npos);
  const auto report = nlohmann::json::parse(read_file(dir.path("report.json")));
  CHECK(report["provenance"]["command"] == "validate");
  CHECK(report["validation"]["ok"] == false);

  r = cli({"validate", dir.path("missing.jsonl")});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"plan", "--manifest", "x"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("plan on the hand pool") {
  TempDir dir;
  const auto manifest = dir.file("pool.jsonl", manifest_text(hand_pool()));

  auto r = cli({"plan", "--manifest", manifest, "--mode", "select", "--n-cap", "2500", "--rho",
                "0.25", "-o", dir.path("select.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("samples: 4375\n") != std::string::npos);
  CHECK(r.out.find("real fraction: 0.2000\n") != std::string::npos);
  const auto plan = nlohmann::json::parse(read_file(dir.path("select.json")));
  CHECK(plan["plan"]["kind"] == "select");
  CHECK(plan["plan"]["counts"]["fake/r1/f1"] == 2500);
  CHECK(plan["plan"]["counts"]["fake/r1/f2"] == 1000);
  CHECK(plan["plan"]["counts"]["real/r1"] == 875);
  REQUIRE(plan["provenance"]["inputs"].size() == 1);
  CHECK(plan["provenance"]["inputs"][0]["sha256"] == sha256_hex(read_file(manifest)));

  r = cli({"plan", "--manifest", manifest, "--mode", "weight", "--tau", "1", "-o",
           dir.path("weight.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("real probability: 0.2000\n") != std::string::npos);

  r = cli({"plan", "--manifest", manifest, "--n-cap", "0", "-o", dir.path("never.json")});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(dir.path("never.json")));

  r = cli({"plan", "--manifest", manifest, "--mode", "bogus", "-o", dir.path("never.json")});
  CHECK(r.code == 2);
}

TEST_CASE("config file values apply and flags override them") {
  TempDir dir;
  const auto manifest = dir.file("pool.jsonl", manifest_text(hand_pool()));
  const auto config = dir.file("run.toml", "[plan]\nmode = \"select\"\nn-cap = 500\nrho = 0.5\n");

  auto r = cli({"--config", config, "plan", "--manifest", manifest, "-o", dir.path("a.json")});
  REQUIRE(r.code == 0);
  auto plan = nlohmann::json::parse(read_file(dir.path("a.json")));
  CHECK(plan["plan"]["params"]["n_cap"] == 500);
  CHECK(plan["plan"]["counts"]["real/r1"] == 500);  // floor(1000 · 0.5)
  CHECK(plan["provenance"]["config"].get<std::string>().find("n-cap=500") != std::string::npos);

  r = cli({"--config", config, "plan", "--manifest", manifest, "--n-cap", "1000", "-o",
           dir.path("b.json")});
  REQUIRE(r.code == 0);
  plan = nlohmann::json::parse(read_file(dir.path("b.json")));
  CHECK(plan["plan"]["params"]["n_cap"] == 1000);
  CHECK(plan["plan"]["params"]["rho"] == 0.5);
  CHECK(plan["provenance"]["config"].get<std::string>().find("n-cap=1000") != std::string::npos);
}

TEST_CASE("materialize, sample and distribution are reproducible") {
  TempDir dir;
  std::mt19937_64 gen(61);
  const auto manifest = dir.file("pool.jsonl", manifest_text(testing::random_records(gen, 3000)));
  REQUIRE(cli({"plan", "--manifest", manifest, "--n-cap", "40", "-o", dir.path("s.json")}).code == 0);
  REQUIRE(cli({"plan", "--manifest", manifest, "--mode", "weight", "--n-cap", "40", "--tau", "2",
               "-o", dir.path("w.json")})
              .code == 0);

  for (const char* name : {"m1.jsonl", "m2.jsonl"}) {
    REQUIRE(cli({"materialize", "--manifest", manifest, "--plan", dir.path("s.json"), "--seed",
                 "7", "-o", dir.path(name)})
                .code == 0);
  }
  CHECK(payload(read_file(dir.path("m1.jsonl"))) == payload(read_file(dir.path("m2.jsonl"))));
  const auto pruned = parse_manifest_text(read_file(dir.path("m1.jsonl")));
  const auto plan = nlohmann::json::parse(read_file(dir.path("s.json")));
  std::uint64_t total = 0;
  for (const auto& [k, v] : plan["plan"]["counts"].items()) total += v.get<std::uint64_t>();
  CHECK(pruned.size() == total);

  for (const char* name : {"ids1.txt", "ids2.txt"}) {
    REQUIRE(cli({"sample", "--manifest", manifest, "--plan", dir.path("w.json"), "--seed", "7",
                 "--length", "5000", "-o", dir.path(name)})
                .code == 0);
  }
  CHECK(payload(read_file(dir.path("ids1.txt"))) == payload(read_file(dir.path("ids2.txt"))));
  REQUIRE(cli({"sample", "--manifest", manifest, "--plan", dir.path("w.json"), "--seed", "8",
               "--length", "5000", "-o", dir.path("ids3.txt")})
              .code == 0);
  CHECK(payload(read_file(dir.path("ids1.txt"))) != payload(read_file(dir.path("ids3.txt"))));

  // Randomized commands refuse to run without a seed.
  CHECK(cli({"sample", "--manifest", manifest, "--plan", dir.path("w.json"), "--length", "5",
             "-o", dir.path("x.txt")})
            .code == 2);
  // A weight plan cannot be materialized.
  CHECK(cli({"materialize", "--manifest", manifest, "--plan", dir.path("w.json"), "--seed", "1",
             "-o", dir.path("x.jsonl")})
            .code == 2);

  REQUIRE(cli({"distribution", "--plan", dir.path("w.json"), "--manifest", manifest, "-o",
               dir.path("d.csv")})
              .code == 0);
  const auto csv = read_file(dir.path("d.csv"));
  CHECK(csv.starts_with("# dosskit "));
  CHECK(csv.find("\ndomain,kind,probability\n") != std::string::npos);
}

TEST_CASE("eval end to end") {
  TempDir dir;
  fs::create_directories(dir.path("scores"));
  dir.file("scores/a.jsonl",
           "{\"id\":\"1\",\"score\":0.9,\"label\":\"real\"}\n{\"id\":\"2\",\"score\":0.1,\"label\":\"fake\"}\n");
  dir.file("scores/b.jsonl",
           "{\"id\":\"1\",\"score\":0.1,\"label\":\"real\"}\n{\"id\":\"2\",\"score\":0.9,\"label\":\"fake\"}\n");
  auto r = cli({"eval", dir.path("scores"), "--out-json", dir.path("r.json"), "--out-csv",
                dir.path("r.csv")});
  REQUIRE(r.code == 0);
  CHECK(r.out == "set,eer,acc,cde\na,0,1,0\nb,1,0,1\nmacro,0.5,0.5,0.5\n");
  const auto report = nlohmann::json::parse(read_file(dir.path("r.json")));
  CHECK(report["provenance"]["inputs"].size() == 2);
  CHECK(report["report"]["macro"]["eer"] == 0.5);

  dir.file("scores/c.jsonl", "{\"id\":\"1\",\"score\":0.5,\"label\":\"real\"}\n");
  r = cli({"eval", dir.path("scores"), "--out-json", dir.path("r2.json")});
  CHECK(r.code == 3);
  CHECK(r.err.find("c: EER undefined") != std::string::npos);
  const auto partial = nlohmann::json::parse(read_file(dir.path("r2.json")));
  CHECK(partial["report"]["partial"] == true);
  CHECK(partial["report"]["per_set"].size() == 2);
}

TEST_CASE("fit and aggregate") {
  TempDir dir;
  const auto curve = dir.file("curve.csv", "x,y\n1,2\n4,1\n");
  auto r = cli({"fit", curve, "-o", dir.path("fit.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out == "y = 2·x^-0.5 (R²=1.0000)\n");
  const auto fit = nlohmann::json::parse(read_file(dir.path("fit.json")));
  CHECK(fit["fit"]["b"].get<double>() == doctest::Approx(-0.5));

  CHECK(cli({"fit", dir.file("neg.csv", "1,2\n2,-1\n")}).code == 2);
  CHECK(cli({"fit", dir.file("flat.csv", "2,2\n2,1\n2,3\n")}).code == 3);

  const auto results = dir.file("res.csv",
                                "axis,n_units,usage,trial,metric,value\n"
                                "source,2,1,0,cde,2\nsource,2,1,1,cde,3\nsource,2,1,2,cde,4\n");
  r = cli({"aggregate", results});
  REQUIRE(r.code == 0);
  CHECK(r.out == "axis,n_units,usage,mean,min,max\nsource,2,1,3,2,4\n");
}

TEST_CASE("scaling and curate subcommands") {
  TempDir dir;
  std::vector<SampleRecord> records;
  for (const std::string s : {"A", "B"}) {
    for (int i = 0; i < 100; ++i) records.push_back(testing::real(s + "r" + std::to_string(i), s));
    for (const std::string g : {"g1", "g2"}) {
      for (int i = 0; i < 200; ++i) {
        records.push_back(testing::fake(s + g + std::to_string(i), s, g));
      }
    }
  }
  const auto manifest = dir.file("pool.jsonl", manifest_text(records));
  auto r = cli({"scaling", "--manifest", manifest, "--n-units", "2", "--per-source-real", "100",
                "--trials", "2", "-o", dir.path("t.json")});
  REQUIRE(r.code == 0);
  CHECK(r.out == "trial 0: 200 real + 800 fake\ntrial 1: 200 real + 800 fake\n");
  r = cli({"scaling", "--manifest", manifest, "--n-units", "4", "-o", dir.path("t.json")});
  CHECK(r.code == 2);

  const auto first = dir.file("one.jsonl", manifest_text({testing::real("x", "vctk", "DS1")}));
  const auto second = dir.file("two.jsonl", manifest_text({testing::real("x", "VCTK", "VCTK")}));
  const auto map = dir.file("map.json", "{\"DS1/vctk\": \"VCTK\"}");
  r = cli({"curate", first, second, "--map", map, "-o", dir.path("cur.jsonl"), "--report",
           dir.path("dedup.json")});
  REQUIRE(r.code == 0);
  const auto curated = parse_manifest_text(read_file(dir.path("cur.jsonl")));
  REQUIRE(curated.size() == 1);
  CHECK(curated[0].dataset == "VCTK");
  CHECK(cli({"curate", first, second, "-o", dir.path("cur2.jsonl")}).code == 2);
}
