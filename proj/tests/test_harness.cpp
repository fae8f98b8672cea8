#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "uniqset/errors.hpp"
#include "uniqset/harness.hpp"

using namespace uniqset;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_CASE("formatting and digests") {
  CHECK(fmt(0.1) == "0.10000000000000001");
  CHECK(std::strtod(fmt(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
  CHECK(fmt(std::nan("")) == "nan");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Table t({"a", "b"});
  t.row(1, true, 0.5);
  t.row(std::string("x,y"), false);
  CHECK(t.str() == "a,b\n1,1,0.5\nx;y,0\n");
}

TEST_CASE("config schema") {
  json c = merge_config("outer", {{"stages", 3}, {"absolute_gate", true}});
  CHECK(c["stages"] == 3);
  CHECK(c["omega"] == "1/log(2+n)");
  CHECK(merge_config("density", {{"r", 1.1}})["r"] == json::array({1.1}));
  CHECK_THROWS_AS(merge_config("outer", {{"stagez", 3}}), ParameterError);
  CHECK_THROWS_AS(merge_config("outer", {{"stages", "three"}}), ParameterError);
  CHECK_THROWS_AS(merge_config("outer", {{"stages", 2.5}}), ParameterError);
  CHECK_THROWS_AS(default_config("nope"), ParameterError);
  for (auto& n : pipeline_names()) CHECK(default_config(n).is_object());
}

TEST_CASE("run directory, manifest and plot data") {
  fs::path d = fs::temp_directory_path() / ("uniqset_harness_" + std::to_string(::getpid()));
  auto r = run_pipeline("separate", {{"J", 12}}, (d / "sep").string());
  CHECK(r.ok);
  CHECK(r.manifest["files"].contains("separation.csv"));
  CHECK(r.manifest["files"].contains("summary.json"));
  CHECK_FALSE(r.manifest["files"].contains("manifest.json"));
  CHECK(r.manifest["config"]["J"] == 12);
  CHECK(r.manifest["config"]["strategy"] == "greedy");
  CHECK(sha256_file((d / "sep" / "separation.csv").string()) == r.manifest["files"]["separation.csv"]);

  auto o = run_pipeline("outer", {{"stages", 2}, {"G", 1 << 13}, {"omega", "n^(-0.5)"}}, (d / "out").string());
  CHECK(o.ok);
  auto csv = plotdata((d / "out").string(), "outer_decay");
  CHECK(csv.rfind("x,y,series\n", 0) == 0);
  CHECK(csv.find("weighted_upper") != std::string::npos);
  CHECK_THROWS_AS(plotdata((d / "sep").string(), "ledger"), PreconditionError);
  CHECK_THROWS_AS(plotdata((d / "sep").string(), "bogus"), ParameterError);

  // a refused transfer is a failed run, not a crash
  auto t = run_pipeline("transfer", {{"measure", "atom:0.3"}, {"grid", 100}}, (d / "tr").string());
  CHECK_FALSE(t.ok);
  CHECK(t.summary.contains("refused"));
  std::error_code ec;
  fs::remove_all(d, ec);
}
