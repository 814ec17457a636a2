#include <charconv>
#include <cmath>
#include <filesystem>
#include <string>

#include <doctest.h>

#include "ingarch/config.hpp"
#include "ingarch/error.hpp"
#include "ingarch/io.hpp"

using namespace ingarch;
using nlohmann::json;

namespace {

template <class F>
std::string data_error_message(F&& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config round-trip") {
  const json doc = json::parse(R"({
    "scenario": "B1", "out": "/tmp/x", "seed": 9, "n": 500, "replications": 3, "workers": 1,
    "model": {"link": "softplus", "softplus_scale": 0.5},
    "truth": {"alpha0": 0.3, "alpha1": 0.4, "beta1": 0.25, "lambda0": 1.0},
    "prior": {"mean": [0.1, 0.2, 0.3], "cov_diag": [0.04, 0.04, 0.09], "lambda0_shape": 2, "lambda0_rate": 0.5},
    "mh": {"iterations": 300, "burn_in": 100, "nb_tolerance": 0.05, "mode": "blocked", "freeze_r_after": 50,
           "lambda0_proposal_rate": 1.5, "update_lambda0": false, "full_jacobian": true},
    "init": {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2, "lambda0": 2.0},
    "chain_start": "init",
    "psais": {"draws": 700, "gpd_fit": "ml", "lambda0": 1.5, "initial_center": [0.3, 0.3, 0.3], "overwrite_draws": true},
    "forecast": {"point_forecast": "plugin", "max_draws": 50},
    "methods": ["psais", "mle"],
    "diagnose": {"max_lag": 12, "bins": 9}
  })");
  const ExperimentConfig c = parse_config(doc);
  CHECK(*c.scenario == "B1");
  CHECK(c.model.link == Link::Softplus);
  CHECK(c.model.softplus_scale == 0.5);
  CHECK(c.prior->theta.cov(2, 2) == 0.09);
  CHECK(c.mh.mode == UpdateMode::Blocked);
  CHECK(*c.mh.freeze_r_after == 50);
  CHECK_FALSE(c.mh.update_lambda0);
  CHECK(c.mh.linearization.loglinear_full_jacobian);
  CHECK_FALSE(c.chain_start_mle);
  CHECK(c.psais.gpd_method == GpdMethod::MaximumLikelihood);
  CHECK(*c.psais.lambda0 == 1.5);
  CHECK(c.forecast.point == PointForecast::Plugin);
  CHECK(c.methods == std::vector<std::string>{"psais", "mle"});

  const json canon = to_json(c);
  CHECK(to_json(parse_config(canon)) == canon);
  CHECK(to_json(parse_config(json::object())) == to_json(parse_config(to_json(parse_config(json::object())))));
}

TEST_CASE("config defaults") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.seed == 1);
  CHECK(c.n == 800);
  CHECK(c.chain_start_mle);
  CHECK(c.mh.nb_tolerance == kDefaultNbTolerance);
  CHECK(c.methods == std::vector<std::string>{"mh", "mle"});
}

TEST_CASE("strict config parsing") {
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seeed": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"mh": {"iters": 10}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": "one"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"seed": -3})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"chain_start": "origin"})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"methods": ["gibbs"]})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"mh": {"mode": "sideways"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"model": {"link": "identity"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse(R"({"prior": {"cov": [[1,0,0],[0,1,0],[0,0,1]], "cov_diag": [1,1,1]}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json::parse("[1, 2]")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("count CSV parsing") {
  CHECK(parse_counts_csv("count\n1\n2\n3\n").size() == 3);
  SUBCASE("extra columns and byte-order mark") {
    const CountSeries x = parse_counts_csv("\xEF\xBB\xBFt,count,note\n0,4,a\n1,0,b\n\n");
    REQUIRE(x.size() == 2);
    CHECK(x[0] == 4);
    CHECK(x[1] == 0);
  }
  SUBCASE("integral floating spellings") { CHECK(parse_counts_csv("count\n3.0\n")[0] == 3); }
  SUBCASE("errors name the line") {
    CHECK(data_error_message([] { parse_counts_csv("count\n1\n2.5\n", "f.csv"); }).find("f.csv:3") != std::string::npos);
    CHECK(data_error_message([] { parse_counts_csv("count\n1\n-4\n", "f.csv"); }).find("f.csv:3") != std::string::npos);
    CHECK(data_error_message([] { parse_counts_csv("count\nabc\n", "f.csv"); }).find("f.csv:2") != std::string::npos);
    CHECK(data_error_message([] { parse_counts_csv("t,count\n1\n", "f.csv"); }).find("f.csv:2") != std::string::npos);
    CHECK_THROWS_AS(parse_counts_csv("value\n1\n"), DataError);
    CHECK_THROWS_AS(parse_counts_csv("count\n"), DataError);
    CHECK_THROWS_AS(parse_counts_csv(""), DataError);
    CHECK_THROWS_AS(read_counts_csv("/nonexistent/series.csv"), DataError);
  }
  SUBCASE("write then read") {
    const auto path = std::filesystem::temp_directory_path() / "ingarch_io_test" / "s.csv";
    const CountSeries x({5, 0, 12, 7});
    write_counts_csv(path, x);
    const CountSeries y = read_counts_csv(path);
    CHECK(std::equal(x.values().begin(), x.values().end(), y.values().begin(), y.values().end()));
    std::filesystem::remove_all(path.parent_path());
  }
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e17, 5e-324}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(NAN) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("content hashes") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");

  const auto dir = std::filesystem::temp_directory_path() / "ingarch_manifest_test";
  std::filesystem::create_directories(dir);
  write_file(dir / "in.txt", "hello\n");
  write_manifest(dir, {{"k", 1}}, {dir / "in.txt"});
  const json m = read_json(dir / "manifest.json");
  CHECK(m["config"]["k"] == 1);
  CHECK(m["inputs"][0]["git_blob_sha1"] == "ce013625030ba8dba906f756967f9e9ca394464a");
  write_file(dir / "bad.json", "{oops");
  CHECK_THROWS_AS(read_json(dir / "bad.json"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV writer checks row width") {
  const auto path = std::filesystem::temp_directory_path() / "ingarch_writer_test.csv";
  {
    CsvWriter w(path, {"a", "b"});
    w.row(std::vector<double>{1.5, 2.0});
    CHECK_THROWS_AS(w.row(std::vector<std::string>{"x"}), ConfigError);
  }
  CHECK(read_file(path) == "a,b\n1.5,2\n");
  std::filesystem::remove(path);
}
