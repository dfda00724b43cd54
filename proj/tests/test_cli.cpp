#include <algorithm>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixture_helpers.hpp"
#include "murmur/cli.hpp"
#include "murmur/experiments.hpp"

using namespace murmur;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  std::vector<std::vector<char>> store;
  for (auto& s : args) {
    store.emplace_back(s.begin(), s.end());
    store.back().push_back('\0');
  }
  std::vector<char*> argv;
  for (auto& v : store) argv.push_back(v.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

experiments::SeriesPoint make_point(long long x, const Rational& scaled, const Rational& value,
                                    const char* tag) {
  return {x, scaled, Value::rational(value), tag};
}

}  // namespace

TEST_CASE("experiment catalog is complete and unambiguous") {
  const auto& entries = cli::experiment_catalog();
  std::set<std::string> names;
  std::set<experiments::Family> families;
  for (const auto& e : entries) {
    CHECK(names.insert(e.name).second);
    CHECK(!std::string(e.summary).empty());
    families.insert(e.family);
    if (e.needs_data)
      CHECK((e.data_kind == ingest::DataKind::Newforms ||
             e.data_kind == ingest::DataKind::Curves));
  }
  CHECK(families.size() == 11);  // every family is reachable from the CLI
  CHECK(cli::find_experiment("delta") != nullptr);
  CHECK(cli::find_experiment("delta")->family == experiments::Family::MfDelta);
  CHECK(cli::find_experiment("bqf-even3")->bqf_class == arith::DiscriminantClass::Even3Mod4);
  CHECK(cli::find_experiment("class-sum-a3")->class_variant == 3);
  CHECK(cli::find_experiment("nope") == nullptr);
}

TEST_CASE("csv rendering sorts and formats") {
  std::vector<experiments::SeriesPoint> pts;
  pts.push_back(make_point(3, Rational(3, 2), Rational(1, 4), "b"));
  pts.push_back(make_point(10, Rational(1), Rational(-22, 7), "a"));
  std::string csv = cli::render_csv(pts);
  CHECK(csv ==
        "x,x_scaled,value,class\n"
        "10,1,-3.14285714286,a\n"
        "3,1.5,0.25,b\n");
}

TEST_CASE("csv parsing round trips and rejects damage") {
  std::vector<experiments::SeriesPoint> pts;
  pts.push_back(make_point(2, Rational(1, 5), Rational(7, 2), "all"));
  pts.push_back(make_point(3, Rational(3, 10), Rational(-1, 3), "all"));
  auto rows = cli::parse_series_csv(cli::render_csv(pts));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].x == 2);
  CHECK(rows[0].x_scaled == doctest::Approx(0.2));
  CHECK(rows[0].value == doctest::Approx(3.5));
  CHECK(rows[0].class_tag == "all");
  CHECK(rows[1].x == 3);

  auto expect_line = [](const std::string& text, long want) {
    try {
      cli::parse_series_csv(text);
      FAIL_CHECK("expected rejection");
    } catch (const validation_error& e) {
      CHECK(e.line == want);
    }
  };
  expect_line("nope\n1,1,1,a\n", 1);
  expect_line("x,x_scaled,value,class\n1,2,3\n", 2);
  expect_line("x,x_scaled,value,class\n1,2,3,4,5\n", 2);
  expect_line("x,x_scaled,value,class\nz,2,3,a\n", 2);
  expect_line("x,x_scaled,value,class\n1,2,z,a\n", 2);
  expect_line("x,x_scaled,value,class\n1,2,3,\n", 2);
  expect_line("", 1);
}

TEST_CASE("svg scatter output") {
  std::vector<cli::CsvRow> rows;
  for (int i = 0; i < 5; ++i) rows.push_back({i + 2, 0.1 * i, i % 2 ? 0.5 : -0.5, "one"});
  rows.push_back({9, 0.9, 0.25, "two"});

  std::string svg = cli::svg_scatter(rows);
  CHECK(svg == cli::svg_scatter(rows));  // deterministic
  CHECK(svg.rfind("<svg ", 0) == 0);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
  std::size_t circles = 0;
  for (std::size_t at = svg.find("<circle"); at != std::string::npos;
       at = svg.find("<circle", at + 1))
    ++circles;
  CHECK(circles == rows.size());
  // first-appearance palette order
  CHECK(svg.find("#1f77b4") != std::string::npos);
  CHECK(svg.find("#d62728") != std::string::npos);

  // sign patterns carry pinned colors regardless of appearance order
  std::vector<cli::CsvRow> signs;
  signs.push_back({2, 0.1, 1.0, "--"});
  signs.push_back({3, 0.2, 2.0, "++"});
  std::string ssvg = cli::svg_scatter(signs);
  CHECK(ssvg.find("fill=\"#2ca02c\"") != std::string::npos);  // --
  CHECK(ssvg.find("fill=\"#1f77b4\"") != std::string::npos);  // ++

  // legend text is xml-escaped
  std::vector<cli::CsvRow> esc;
  esc.push_back({2, 0.1, 1.0, "a<b&c"});
  CHECK(cli::svg_scatter(esc).find("a&lt;b&amp;c") != std::string::npos);

  std::string empty = cli::svg_scatter({});
  CHECK(empty.rfind("<svg ", 0) == 0);
  CHECK(empty.find("<circle") == std::string::npos);
}

TEST_CASE("sieve builds and reuses table caches") {
  auto dir = fixtures::scratch_dir("murmur_cli_sieve");
  std::string cache = (dir / "cache").string();
  CHECK(run({"murmur", "sieve", "--limit", "50000", "--cache", cache}) == 0);
  CHECK(fs::exists(fs::path(cache) / "factor.murm"));
  CHECK(fs::exists(fs::path(cache) / "hurwitz.murm"));

  // corrupt the factor cache; the next consumer must warn and rebuild
  fs::path fpath = fs::path(cache) / "factor.murm";
  std::string bytes = fixtures::read_file(fpath);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
  fixtures::write_file(fpath, bytes);
  std::string out = (dir / "out").string();
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--cache", cache, "--out", out}) == 0);
  CHECK_NOTHROW(ingest::load_factor_table(fpath.string()));

  CHECK(run({"murmur", "sieve", "--limit", "2"}) == 2);                    // below minimum
  CHECK(run({"murmur", "sieve", "--limit", "2000000000", "--cache", cache}) == 3);
}

TEST_CASE("run emits stable csv and a manifest") {
  auto dir = fixtures::scratch_dir("murmur_cli_run");
  std::string out = (dir / "out").string();
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--out", out}) == 0);

  fs::path csv_path = fs::path(out) / "delta.csv";
  fs::path man_path = fs::path(out) / "delta.manifest.json";
  REQUIRE(fs::exists(csv_path));
  REQUIRE(fs::exists(man_path));
  std::string csv = fixtures::read_file(csv_path);
  CHECK(csv.rfind("x,x_scaled,value,class\n", 0) == 0);
  CHECK(cli::parse_series_csv(csv).size() == arith::primes_up_to(40).size());

  std::string manifest = fixtures::read_file(man_path);
  CHECK(manifest.find("\"experiment\": \"delta\"") != std::string::npos);
  CHECK(manifest.find("\"rows\": 12") != std::string::npos);
  CHECK(manifest.find("\"xi_policy\": \"strict\"") != std::string::npos);

  // reruns and thread caps do not change the bytes
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--out", out, "--threads", "2"}) == 0);
  CHECK(fixtures::read_file(csv_path) == csv);

  CHECK(run({"murmur", "run", "delta", "--x", "10", "--out", out, "--smooth", "2"}) == 0);
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--out", out, "--beta", "5/2"}) == 0);
  CHECK(run({"murmur", "run", "class-sum-a0", "--x", "10", "--out", out}) == 0);
  CHECK(run({"murmur", "run", "bqf-odd1", "--x", "10", "--out", out}) == 0);
  CHECK(run({"murmur", "run", "lvalue-p", "--x", "10", "--out", out}) == 0);
  CHECK(fs::exists(fs::path(out) / "lvalue-p.csv"));
}

TEST_CASE("strict xi policy refuses biased windows") {
  auto dir = fixtures::scratch_dir("murmur_cli_xi");
  std::string out = (dir / "out").string();
  // [10, 20] contains even levels, which always hit the undetermined branch
  CHECK(run({"murmur", "run", "no-root", "--x", "10", "--out", out}) == 4);
  CHECK(!fs::exists(fs::path(out) / "no-root.csv"));
  CHECK(run({"murmur", "run", "mobius", "--x", "10", "--out", out}) == 4);
  CHECK(run({"murmur", "run", "mobius-slope", "--x", "12", "--out", out}) == 4);
}

TEST_CASE("data-driven experiments from files") {
  auto dir = fixtures::scratch_dir("murmur_cli_data");
  std::string out = (dir / "out").string();
  std::string curves = fixtures::data_path("curves_small.txt");

  CHECK(run({"murmur", "run", "ec-no-root", "--x", "11", "--data", curves, "--out", out}) == 0);
  std::string manifest = fixtures::read_file(fs::path(out) / "ec-no-root.manifest.json");
  CHECK(manifest.find("\"data_fnv1a64\"") != std::string::npos);
  CHECK(run({"murmur", "run", "ec-fixed-root", "--x", "11", "--data", curves, "--out", out}) == 0);

  auto ds = fixtures::curves_to_newforms(fixtures::load_curves(), 50,
                                         [](const ingest::CurveRecord& c) {
                                           return arith::factorize_trial(c.conductor).omega() == 2;
                                         });
  std::string nf_path = fixtures::write_file(dir / "nf.txt", ingest::serialize_newforms(ds));
  CHECK(run({"murmur", "run", "al-eigenspace", "--x", "14", "--data", nf_path, "--out", out}) == 0);
  CHECK(run({"murmur", "run", "al-eigenspace", "--x", "2", "--al-p", "13", "--data", nf_path,
             "--out", out}) == 0);
  CHECK(run({"murmur", "run", "mf-fixed-root", "--x", "14", "--data", nf_path, "--out", out}) == 0);
  CHECK(fs::exists(fs::path(out) / "mf-fixed-root.csv"));
}

TEST_CASE("plot renders a csv") {
  auto dir = fixtures::scratch_dir("murmur_cli_plot");
  std::string out = (dir / "out").string();
  REQUIRE(run({"murmur", "run", "delta", "--x", "10", "--out", out}) == 0);
  std::string csv = (fs::path(out) / "delta.csv").string();
  std::string svg = (fs::path(out) / "delta.svg").string();
  CHECK(run({"murmur", "plot", csv, svg}) == 0);
  std::string text = fixtures::read_file(svg);
  CHECK(text.rfind("<svg ", 0) == 0);
  CHECK(text.find("<circle") != std::string::npos);

  CHECK(run({"murmur", "plot", (dir / "missing.csv").string(), svg}) == 2);
  std::string bad = fixtures::write_file(dir / "bad.csv", "not,a,series\n");
  CHECK(run({"murmur", "plot", bad, svg}) == 2);
}

TEST_CASE("ingest validates datasets") {
  auto dir = fixtures::scratch_dir("murmur_cli_ingest");
  std::string curves = fixtures::data_path("curves_small.txt");
  CHECK(run({"murmur", "ingest", curves, "--kind", "curves"}) == 0);
  CHECK(run({"murmur", "ingest", curves, "--kind", "newforms"}) == 2);  // wrong header
  CHECK(run({"murmur", "ingest", (dir / "nope.txt").string(), "--kind", "curves"}) == 2);
  CHECK(run({"murmur", "ingest", curves}) == 2);  // --kind is required

  auto ds = fixtures::curves_to_newforms(fixtures::load_curves(), 20);
  std::string nf_path = fixtures::write_file(dir / "nf.txt", ingest::serialize_newforms(ds));
  CHECK(run({"murmur", "ingest", nf_path, "--kind", "newforms"}) == 0);
}

TEST_CASE("argument errors exit with the validation code") {
  CHECK(run({"murmur"}) == 2);
  CHECK(run({"murmur", "--help"}) == 0);
  CHECK(run({"murmur", "run", "bogus", "--x", "10"}) == 2);
  CHECK(run({"murmur", "run", "mf-fixed-root", "--x", "10"}) == 2);     // needs --data
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--beta", "1.5"}) == 2);
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--beta", "3/0"}) == 2);
  CHECK(run({"murmur", "run", "delta", "--x", "10", "--xi-policy", "maybe"}) == 2);
  CHECK(run({"murmur", "run", "delta"}) == 2);                          // --x is required
  CHECK(run({"murmur", "run", "delta", "--x", "1"}) == 2);              // window too small
}
