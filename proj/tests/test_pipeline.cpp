#include "cryptofolio/pipeline.hpp"
#include "cryptofolio/hash.hpp"
#include "cryptofolio/simulation.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace cryptofolio;
using namespace cryptofolio::pipeline;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Small synthetic panel plus a config using sample estimators only.
fs::path make_workspace(const std::string& name, std::uint64_t seed = 3) {
  const auto dir = test_support::scratch_dir(name);
  simulation::GarchPanelSpec spec;
  spec.assets = 3;
  spec.days = 500;
  simulation::write_prices(simulation::simulate_garch_prices(spec, seed), dir / "prices.csv");
  return dir;
}

std::string base_config(const std::string& extra = "") {
  return R"({
    "prices": "prices.csv",
    "window": {"daily": 60, "weekly": 12},
    "gammas": [1, 5],
    "strategies": [
      {"label": "MV", "framework": "mv"},
      {"label": "MVC", "framework": "mvc"},
      {"label": "GMV", "framework": "gmv", "mean": "zero"},
      {"label": "GMVC", "framework": "gmvc", "mean": "zero"}
    ])" + extra + "\n}";
}

RunConfig config_in(const fs::path& dir, const std::string& text, const std::string& out) {
  auto c = parse_config(text, dir);
  c.output_dir = dir / out;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(base_config(R"(,
    "dcc": {"refit_stride": 5, "window": "rolling"},
    "metrics": {"risk": "one_plus"},
    "kappa": {"weekly": 50})"),
                              "/data");
  CHECK(c.prices == fs::path("/data/prices.csv"));
  CHECK(c.gammas == std::vector<double>{1, 5});
  CHECK(c.strategies.size() == 4);
  CHECK(c.strategies[2].mean == backtest::MeanSource::zero);
  CHECK(c.dcc_refit_stride == 5);
  CHECK_FALSE(c.dcc_expanding);
  CHECK(c.convention.risk == evaluation::Summand::one_plus);
  CHECK(c.kappa.at(market_data::Frequency::weekly) == 50);
  CHECK(c.kappa.at(market_data::Frequency::daily) == 365);
  CHECK(c.window.at(market_data::Frequency::daily) == 60);

  CHECK_THROWS_AS(parse_config(R"({"prices": "p.csv", "colour": 1})", "."), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"prices": 3})", "."), ConfigError);
  CHECK_THROWS_AS(parse_config("{", "."), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"beta": 0.1})", "."), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"prices": "p.csv", "dcc": {"window": "sliding"}})", "."), ConfigError);
}

TEST_CASE("slugs") {
  CHECK(slug("1/N") == "1overN");
  CHECK(slug("MV DCC (ext)") == "MV_DCC__ext_");
  CHECK(slug("a-b_c.d") == "a-b_c.d");
}

TEST_CASE("validation reports every problem") {
  const auto dir = make_workspace("pl_validate");
  SUBCASE("clean config") { CHECK(validate(parse_config(base_config(), dir)).empty()); }
  SUBCASE("bad ranges and labels") {
    auto c = parse_config(base_config(), dir);
    c.train_fraction = 1.5;
    c.gammas.push_back(-1);
    c.strategies.push_back(c.strategies[0]);
    c.strategies.push_back({"1/N", optimizers::Framework::mv, backtest::MeanSource::sample, "", backtest::CovSource::sample});
    const auto d = validate(c);
    auto has = [&](const std::string& field) {
      return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.field == field; });
    };
    CHECK(has("train_fraction"));
    CHECK(has("gammas"));
    CHECK(has("strategies"));
  }
  SUBCASE("missing prices") {
    auto c = parse_config(base_config(), dir);
    c.prices = dir / "nope.csv";
    REQUIRE(validate(c).size() == 1);
    CHECK(validate(c)[0].field == "prices");
  }
  SUBCASE("window longer than the training range") {
    auto c = parse_config(base_config(), dir);
    c.window[market_data::Frequency::weekly] = 60;
    const auto d = validate(c);
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "window.weekly");
  }
  SUBCASE("unknown forecast set and misaligned forecasts") {
    auto c = parse_config(base_config(), dir);
    c.strategies.push_back({"EXT", optimizers::Framework::mv, backtest::MeanSource::external, "arima", backtest::CovSource::sample});
    CHECK_FALSE(validate(c).empty());
    std::ofstream(dir / "f.csv") << "date,A0,A1,A2\n2015-08-08,0,0,0\n";
    c.forecasts["arima"] = {{market_data::Frequency::daily, dir / "f.csv"},
                            {market_data::Frequency::weekly, dir / "f.csv"}};
    const auto d = validate(c);
    REQUIRE(d.size() == 2);
    CHECK(d[0].field == "forecasts.arima.daily");
  }
  SUBCASE("DCC needs a long training range") {
    auto c = parse_config(base_config(), dir);
    c.strategies.push_back({"DCC", optimizers::Framework::gmv, backtest::MeanSource::zero, "",
                            backtest::CovSource::dcc});
    const auto d = validate(c);
    REQUIRE(d.size() == 1);
    CHECK(d[0].field == "window.weekly");
  }
}

TEST_CASE("run produces a complete, deterministic output tree") {
  const auto dir = make_workspace("pl_run");
  const std::string text = base_config();
  const auto a = run(config_in(dir, text, "a"), {Exec::parallel});
  const auto b = run(config_in(dir, text, "b"), {Exec::serial});
  CHECK(a.ledgers == 2 * 4 * 2);
  CHECK_FALSE(fs::exists(dir / "a" / "STALE"));
  for (const char* f : {"daily", "weekly"}) {
    for (const char* file : {"report.json", "metrics.csv", "fees.csv", "report.txt"}) {
      const auto rel = fs::path("reports") / f / file;
      REQUIRE(fs::exists(dir / "a" / rel));
      CHECK(slurp(dir / "a" / rel) == slurp(dir / "b" / rel));
    }
    CHECK(slurp(dir / "a" / "ledgers" / f / "MVC_g5.csv") == slurp(dir / "b" / "ledgers" / f / "MVC_g5.csv"));
  }

  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest["config_sha256"] == sha256_hex(text));
  const std::string rel = "reports/daily/report.json";
  CHECK(manifest["files"][rel] == sha256_hex(slurp(dir / "a" / rel)));

  // Reports rebuilt from the stored ledgers are byte-identical.
  const std::string before = slurp(dir / "a" / "reports" / "weekly" / "report.json");
  fs::remove(dir / "a" / "reports" / "weekly" / "report.json");
  rerender_reports(dir / "a");
  CHECK(slurp(dir / "a" / "reports" / "weekly" / "report.json") == before);

  const auto report = evaluation::report_from_json(before);
  CHECK(report.strategies.size() == 4);
  CHECK(report.kappa == 52);
}

TEST_CASE("benchmark-only configuration") {
  const auto dir = make_workspace("pl_bench_only");
  const auto s = run(config_in(dir, R"({"prices": "prices.csv", "frequencies": ["weekly"], "window": {"weekly": 12}})", "out"));
  CHECK(s.ledgers == 0);
  CHECK(fs::exists(dir / "out" / "ledgers" / "weekly" / "benchmark.csv"));
  CHECK(fs::exists(dir / "out" / "reports" / "weekly" / "metrics.csv"));
}

TEST_CASE("a failing stage leaves a STALE marker") {
  const auto dir = make_workspace("pl_stale");
  auto c = config_in(dir, base_config(R"(, "solver": {"kkt_tolerance": 1e-300})"), "out");
  try {
    run(c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "backtest");
  }
  CHECK(fs::exists(dir / "out" / "STALE"));
  CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));

  c.solver.kkt_tolerance = 1e-8;
  run(c);
  CHECK_FALSE(fs::exists(dir / "out" / "STALE"));

  c.train_fraction = 2;
  CHECK_THROWS_AS(run(c), StageError);
}

TEST_CASE("stats report lists every asset") {
  const auto dir = make_workspace("pl_stats");
  const std::string text = stats_report(parse_config(base_config(), dir));
  for (const char* id : {"A0", "A1", "A2"}) CHECK(text.find(id) != std::string::npos);
  CHECK(text.find("weekly") != std::string::npos);
}
