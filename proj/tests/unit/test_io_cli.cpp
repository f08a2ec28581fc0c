#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "textcen/cli.hpp"
#include "textcen/io.hpp"

using namespace textcen;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures{TEXTCEN_FIXTURE_DIR};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("textcen-test-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& s) { write_file_atomic(p, s); }

}  // namespace

TEST_CASE("parse_region examples") {
  CHECK(parse_region("0.1,0.2,0.5,0.6") == Region::make(0.1, 0.2, 0.5, 0.6));
  CHECK(parse_region("golden") == Region::make(0.618, 0.30, 0.95, 0.70));
  CHECK(parse_region("center") == Region::make(0.35, 0.40, 0.65, 0.60));
  try {
    parse_region("0.5,0.5,0.4,0.6");
    FAIL("expected InvariantError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvariantError);
  }
  try {
    parse_region("0.1,abc,0.5,0.6");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_region("0.1,0.2,0.5"), Error);
  CHECK_THROWS_AS(parse_region("sunset"), Error);
}

TEST_CASE("scene file parses to the standard scene and round-trips") {
  const Scene s = load_scene(kFixtures / "std3.json");
  const Scene ref = standard_scene();
  CHECK(s.objects == ref.objects);
  CHECK(s.layers == ref.layers);
  CHECK(s.steps == ref.steps);
  CHECK(s.seed == ref.seed);
  const Scene back = parse_scene(scene_to_json(s).dump());
  CHECK(back.objects == s.objects);
  CHECK(back.targets == s.targets);
}

TEST_CASE("strict scene schema reports the offending line") {
  const std::string text =
      "{\n"
      "  \"objects\": [\n"
      "    {\"token\": 1, \"label\": \"a\", \"center\": [0.5, 0.5], \"sigma\": 0.1, \"amplitude\": 1.0}\n"
      "  ],\n"
      "  \"layers\": [[16, 16]],\n"
      "  \"stpes\": 5\n"
      "}\n";
  try {
    parse_scene(text, "bad.json");
    FAIL("expected InvariantError");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.json:6") != std::string::npos);
    CHECK(msg.find("stpes") != std::string::npos);
  }
  const std::string bad_sigma =
      "{\"objects\": [{\"token\": 1, \"label\": \"a\", \"center\": [0.5, 0.5],\n"
      "\"sigma\": -1, \"amplitude\": 1.0}], \"layers\": [[16, 16]], \"steps\": 2}";
  try {
    parse_scene(bad_sigma, "s");
    FAIL("expected InvariantError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("s:2") != std::string::npos);
  }
  try {
    parse_scene("{\"objects\": [", "s");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }

  TempDir tmp("strict");
  write(tmp.path / "bad.json", text);
  const CliResult r = cli({"simulate", "--scene", (tmp.path / "bad.json").string(), "--region", "golden", "--out",
                           (tmp.path / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(":6") != std::string::npos);
}

TEST_CASE("PGM encoding examples") {
  const std::string pgm = encode_pgm(AttentionMap(2, 2, {0, 1, 0.5, 0.25}));
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 4);
  CHECK(pgm.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 0]) == 0);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 1]) == 255);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 2]) == 128);
  CHECK(static_cast<unsigned char>(pgm[header.size() + 3]) == 64);

  const std::string zero = encode_pgm(AttentionMap::zeros(3, 2));
  for (std::size_t i = zero.size() - 6; i < zero.size(); ++i) CHECK(zero[i] == 0);

  const AttentionMap back = decode_pgm(pgm);
  CHECK(back(0, 1) == 1.0);
  CHECK(back(1, 0) == doctest::Approx(128.0 / 255.0));
  CHECK_THROWS_AS(decode_pgm("P2\n2 2\n255\n0 0 0 0"), Error);
  CHECK_THROWS_AS(decode_pgm("P5\n2 2\n255\n\x01"), Error);
}

TEST_CASE("rendered PGMs keep the argmax") {
  std::mt19937_64 rng(31);
  TempDir tmp("pgm");
  for (int trial = 0; trial < 30; ++trial) {
    auto g = test::random_grid(rng, 11, 13);
    g[trial % 11][trial % 13] = 2.0;  // unique peak
    const AttentionMap m = test::to_map(g);
    write_render(m, tmp.path / "m.pgm");
    const AttentionMap r = read_pgm(tmp.path / "m.pgm");
    auto argmax = [](const AttentionMap& x) {
      return std::max_element(x.values().begin(), x.values().end()) - x.values().begin();
    };
    CHECK(argmax(r) == argmax(m));
  }

  // Standard scene token 1 at t=0: brightest pixel at the blob centre.
  const Scene s = standard_scene();
  Rng r0(s.seed, 0);
  write_render(step_unguided(s, 0, r0).map(0, 1), tmp.path / "sun.pgm");
  const AttentionMap sun = read_pgm(tmp.path / "sun.pgm");
  const auto at = std::max_element(sun.values().begin(), sun.values().end()) - sun.values().begin();
  CHECK(std::abs(at / 64 - (0.45 * 64 - 0.5)) <= 1.0);
  CHECK(std::abs(at % 64 - (0.78 * 64 - 0.5)) <= 1.0);
}

TEST_CASE("canonical JSON formatting") {
  Json doc = {{"b", 1}, {"a", {{"y", 0.1}, {"x", 2.0}}}, {"c", Json::array({1.0 / 3.0, nullptr, true})}};
  const std::string s = canonical_dump(doc);
  CHECK(s ==
        "{\n  \"a\": {\n    \"x\": 2.0,\n    \"y\": 0.1\n  },\n  \"b\": 1,\n  \"c\": [\n    0.333333333,\n    null,\n"
        "    true\n  ]\n}\n");
  CHECK(round_sig9(0.08664253970000001) == 0.0866425397);
  CHECK(format_sig9(1e-20) == "1e-20");
}

TEST_CASE("report round-trips and the CSV header is exact") {
  Scene s = standard_scene();
  s.steps = 5;
  const GuidanceReport rep = run(s, golden_region(), {});
  const Json doc = report_to_json(rep, s, golden_region(), {}, {"x.pgm"});
  const std::string text = canonical_dump(doc);
  const Json back = parse_report(text);
  CHECK(canonical_dump(back) == text);
  const RunSummary sum = summary_from_report(back);
  CHECK(sum.steps == 5);
  CHECK(sum.guided.tv_loss_in_R == doctest::Approx(rep.metrics_res.tv_loss_in_R).epsilon(1e-8));

  const std::string csv = metrics_csv(rep);
  CHECK(csv.substr(0, csv.find('\n')) == "step,conflicts,max_displacement,loss_total,loss_main,loss_norm,mean_attn_in_R");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK_THROWS_AS(parse_report("{\"format\": \"other\"}"), Error);
}

TEST_CASE("cli simulate, metrics and compare") {
  TempDir tmp("cli");
  const std::string scene = (kFixtures / "std3.json").string();
  const fs::path out = tmp.path / "run";
  const CliResult sim = cli({"simulate", "--scene", scene, "--region", "golden", "--out", out.string()});
  REQUIRE(sim.code == 0);
  const Json rep = parse_report(read_file(out / "report.json"));
  CHECK(rep.at("steps").size() == 50);
  CHECK(fs::exists(out / "metrics.csv"));
  CHECK(fs::exists(out / "step_49_ori_1.pgm"));
  CHECK(fs::exists(out / "step_0_res_3.pgm"));

  write_render(AttentionMap::filled(16, 16, 0.7), tmp.path / "flat.pgm");
  const CliResult met = cli({"metrics", "--field", (tmp.path / "flat.pgm").string(), "--region", "center"});
  CHECK(met.code == 0);
  CHECK(Json::parse(met.out).at("tv_loss_in_R") == 0.0);

  const CliResult same = cli({"compare", "--report-a", (out / "report.json").string(), "--report-b",
                              (out / "report.json").string()});
  CHECK(same.code == 0);
  CHECK(Json::parse(same.out).at("a_dominates") == true);

  // Disabling the exclusion and forces makes the run worse than the default one.
  const fs::path weak = tmp.path / "weak";
  REQUIRE(cli({"simulate", "--scene", scene, "--region", "golden", "--theta", "5", "--no-renders", "--out",
               weak.string()})
              .code == 0);
  CHECK(cli({"compare", "--report-a", (weak / "report.json").string(), "--report-b",
             (out / "report.json").string()})
            .code == 3);
  CHECK(cli({"compare", "--report-a", (out / "report.json").string(), "--report-b",
             (weak / "report.json").string()})
            .code == 0);
}

TEST_CASE("cli error exit codes") {
  const CliResult unknown = cli({"simulate", "--bogus"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("simulate") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({}).code == 1);
  CHECK(cli({"--help"}).code == 0);

  const std::string scene = (kFixtures / "std3.json").string();
  TempDir tmp("errs");
  CHECK(cli({"simulate", "--scene", scene, "--region", "0.9,0.1,0.2,0.5", "--out", tmp.path.string()}).code == 2);
  CHECK(cli({"simulate", "--scene", scene, "--region", "golden", "--lambda", "2", "--out", tmp.path.string()})
            .code == 2);
  CHECK(cli({"simulate", "--scene", (tmp.path / "missing.json").string(), "--region", "golden"}).code == 2);
  CHECK(cli({"metrics", "--field", (tmp.path / "missing.pgm").string(), "--region", "golden"}).code == 2);
  CHECK(cli({"compare", "--report-a", scene, "--report-b", scene}).code == 2);
}
