#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "afkg/harness.hpp"
#include "afkg/lattice.hpp"

using namespace afkg::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json analyze_config() {
  return json{{"kind", "gcwm-analyze"}, {"seed", 1}, {"model", {{"beta", {-3.0, 3.0}}}}, {"run", json::object()}};
}

json fkg_config() {
  return json{{"kind", "gcwm-fkg"},
              {"seed", 11},
              {"model", {{"beta", {-3.0, 3.0}}}},
              {"run", {{"n", 8}, {"eta", 0.3}}}};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("afkg_test_" + name);
  fs::remove_all(p);
  return p;
}

bool contains(const std::vector<std::string>& d, const std::string& needle) {
  for (const auto& s : d)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(AFKG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

}  // namespace

TEST_CASE("well-formed configs validate cleanly") {
  CHECK(validate(analyze_config()).empty());
  CHECK(validate(fkg_config()).empty());
  const json bound{{"kind", "bound-eval"},
                   {"seed", 0},
                   {"run", {{"alpha", 0.5}, {"T", 100}, {"mu_lambda_complement", 0.0}, {"diameter", "inf"}}}};
  CHECK(validate(bound).empty());
}

TEST_CASE("validation diagnostics") {
  auto c = analyze_config();
  c["run"]["foo"] = 1;
  CHECK(contains(validate(c), "unknown key run.foo"));

  c = analyze_config();
  c.erase("seed");
  CHECK_FALSE(validate(c).empty());

  c = analyze_config();
  c["kind"] = "nope";
  CHECK_FALSE(validate(c).empty());

  c = analyze_config();
  c["model"]["beta"] = {0.0, -1.0};
  CHECK(contains(validate(c), "ferromagnetic violation j=2"));

  c = fkg_config();
  c["run"]["m_star"] = 0.5;
  CHECK_FALSE(validate(c).empty());

  c = fkg_config();
  c["run"]["eta"] = 0.45;
  CHECK_FALSE(validate(c).empty());

  c = fkg_config();
  c["run"]["n"] = "eight";
  CHECK_FALSE(validate(c).empty());

  json d{{"kind", "defect"}, {"seed", 1}, {"model", {{"beta", {0.0, 3.0}}}}, {"run", {{"n", 5}}}};
  CHECK(contains(validate(d), "model.family"));

  CHECK_THROWS_AS(parse_config(c), ValidationError);
}

TEST_CASE("config round trip") {
  const auto cfg = parse_config(fkg_config());
  CHECK(cfg.kind == "gcwm-fkg");
  CHECK(cfg.seed == 11);
  const auto back = parse_config(to_json(cfg));
  CHECK(back.kind == cfg.kind);
  CHECK(back.model == cfg.model);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("same config and seed give byte-identical bundles") {
  const auto cfg = parse_config(fkg_config());
  const auto a = execute(cfg);
  const auto b = execute(cfg);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].content == b.files[i].content);
  }
  const auto* manifest = a.find("manifest.json");
  REQUIRE(manifest != nullptr);
  CHECK(a.files.back().name == "manifest.json");
  const auto m = json::parse(manifest->content);
  CHECK(m["files"].size() == a.files.size() - 1);
  REQUIRE(a.find("summary.json") != nullptr);
  const auto s = json::parse(a.find("summary.json")->content);
  CHECK(s["schema_version"] == kSchemaVersion);
  CHECK(s["kind"] == "gcwm-fkg");
}

TEST_CASE("a different seed changes sampled output but not exact output") {
  auto c = fkg_config();
  const auto a = execute(parse_config(c));
  c["seed"] = 12;
  const auto b = execute(parse_config(c));
  // Exhaustive mode at n = 8 involves no randomness.
  CHECK(json::parse(a.find("summary.json")->content)["seed"] == 11);
  CHECK(json::parse(a.find("summary.json")->content)["results"] ==
        json::parse(b.find("summary.json")->content)["results"]);
}

TEST_CASE("run writes the bundle and leaves no staging directory") {
  const auto dir = scratch("bundle");
  const auto bundle = run(parse_config(analyze_config()), dir);
  for (const auto& f : bundle.files) CHECK(fs::exists(dir / f.name));
  CHECK_FALSE(fs::exists(fs::path(dir.string() + ".partial")));
  fs::remove_all(dir);
}

TEST_CASE("a rejected run leaves no partial output") {
  // Exhaustive ERGM lattice scan is capped at n = 6.
  const json c{{"kind", "ergm-fkg"},
               {"seed", 1},
               {"model", {{"beta", {-0.35, 0.2}}, {"graphs", {"edge", "triangle"}}}},
               {"run", {{"n", 9}, {"mode", "exhaustive"}}}};
  const auto diags = validate(c);
  const auto dir = scratch("rejected");
  if (diags.empty()) {
    CHECK_THROWS_AS(run(parse_config(c), dir), afkg::Rejected);
  } else {
    CHECK_THROWS_AS(parse_config(c), ValidationError);
  }
  CHECK_FALSE(fs::exists(dir));
  CHECK_FALSE(fs::exists(fs::path(dir.string() + ".partial")));
}

TEST_CASE("CLI exit codes") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  write_file(dir / "good.json", analyze_config().dump());
  auto bad = analyze_config();
  bad["run"]["foo"] = 1;
  write_file(dir / "bad.json", bad.dump());
  write_file(dir / "broken.json", "{ not json");
  auto rejected = fkg_config();
  rejected["run"]["n"] = 40;
  rejected["run"]["mode"] = "exhaustive";
  write_file(dir / "rejected.json", rejected.dump());

  CHECK(run_cli("list-experiments") == 0);
  CHECK(run_cli("validate " + (dir / "good.json").string()) == 0);
  CHECK(run_cli("validate " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("validate " + (dir / "broken.json").string()) == 2);
  CHECK(run_cli("run " + (dir / "good.json").string() + " --out " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(run_cli("run " + (dir / "good.json").string()) == 2);
  const int code = run_cli("run " + (dir / "rejected.json").string() + " --out " + (dir / "out2").string());
  CHECK((code == 2 || code == 3));
  CHECK_FALSE(fs::exists(dir / "out2"));
  CHECK(run_cli("frobnicate") == 2);
  fs::remove_all(dir);
}
