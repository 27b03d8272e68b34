#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "activegp/cli.hpp"
#include "activegp/error.hpp"
#include "activegp/io.hpp"
#include "instances.hpp"

using namespace activegp;
using namespace testing_support;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "activegp_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(81);
  std::uniform_int_distribution<std::uint64_t> bits;
  int tested = 0;
  while (tested < 2000) {
    const std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    CHECK(parse_double(format_double(x)) == x);
    ++tested;
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK(parse_double(format_double(std::numeric_limits<double>::infinity())) > 0);
  CHECK(std::isinf(parse_double("-inf")));
  CHECK_THROWS_AS((void)parse_double("1.0x"), Error);
  CHECK_THROWS_AS((void)parse_double(""), Error);
}

TEST_CASE("non-finite numbers survive JSON") {
  const Eigen::Vector3d v(1.5, std::numeric_limits<double>::infinity(), std::nan(""));
  const Eigen::VectorXd back = vector_from_json(Json::parse(vector_to_json(v).dump()));
  CHECK(back[0] == 1.5);
  CHECK(std::isinf(back[1]));
  CHECK(std::isnan(back[2]));
}

TEST_CASE("dataset round trip keeps replicates") {
  std::mt19937_64 rng(82);
  const Bounds b = random_bounds(rng, 3);
  const Dataset d = random_dataset(rng, b, 7, 2, 4);
  const Dataset e = dataset_from_json(Json::parse(dataset_to_json(d).dump()));
  CHECK(e.design == d.design);
  CHECK(e.replications == d.replications);
  CHECK(e.sample_means == d.sample_means);
  CHECK(e.bounds.lo == d.bounds.lo);
  CHECK(e.bounds.hi == d.bounds.hi);
  REQUIRE(e.responses.size() == d.responses.size());
  for (std::size_t t = 0; t < d.responses.size(); ++t) CHECK(e.responses[t] == d.responses[t]);
}

TEST_CASE("model round trip reproduces the predictor bit for bit") {
  std::mt19937_64 rng(83);
  for (ModelVariant v : {ModelVariant::StochasticKriging, ModelVariant::SurrogateWithUncertainties}) {
    const Instance in = random_instance(rng, v, 6, 3, 2);
    const FittedModel m = model_from_json(Json::parse(model_to_json(in.model).dump()));
    CHECK(m.spec.variant == in.spec.variant);
    CHECK(m.spec.weights == in.spec.weights);
    for (int j = 0; j < in.spec.p; ++j) {
      CHECK(m.outputs[j].hp.pack(m.spec) == in.model.outputs[j].hp.pack(in.spec));
      CHECK(m.outputs[j].S_hat == in.model.outputs[j].S_hat);
    }
    for (int r = 0; r < 5; ++r) {
      const Eigen::VectorXd f0 = oracle::uniform_rows(1, in.data.bounds, rng).row(0).transpose();
      CHECK(predict(m, f0) == predict(in.model, f0));
      CHECK(predict_variance(m, f0) == predict_variance(in.model, f0));
    }
  }
}

TEST_CASE("oracle round trip gives the same truth") {
  OracleConfig c;
  c.q = 4;
  c.p = 3;
  c.bounds = Bounds::uniform(4);
  c.seed = 5;
  c.anchors = 40;
  const OracleSpec o = make_oracle(c);
  const OracleSpec back = oracle_from_json(Json::parse(oracle_to_json(o).dump()));
  std::mt19937_64 rng(84);
  for (int r = 0; r < 10; ++r) {
    const Eigen::VectorXd f = oracle::uniform_rows(1, o.bounds, rng).row(0).transpose();
    CHECK(oracle_truth(back, f) == oracle_truth(o, f));
  }
  CHECK(back.sigma_F_star == o.sigma_F_star);
  CHECK(back.sigma_eps2_star == o.sigma_eps2_star);
}

TEST_CASE("matrix CSV round trip") {
  std::mt19937_64 rng(85);
  const Eigen::MatrixXd m = oracle::uniform_rows(9, Bounds::uniform(4), rng);
  const auto path = scratch("m.csv").string();
  write_matrix_csv(path, m);
  CHECK(read_matrix_csv(path) == m);
}

TEST_CASE("curve CSV round trip and malformed input") {
  LearningCurve c;
  c.strategy = StrategyKind::DOWAL;
  for (int i = 0; i < 4; ++i) {
    CurveRow r;
    r.iteration = i;
    r.n_samples = 11 + i;
    r.strategy = StrategyKind::DOWAL;
    r.selected_point_id = i == 0 ? -1 : 7 * i;
    r.mean_mad = 0.01 / (i + 1);
    r.max_mad = 0.1 / (i + 1);
    r.cv_mse = i < 2 ? std::nan("") : 1e-5 * i;
    r.fit_loglik = -12.345678901234567 * i;
    r.stop_reason = i == 3 ? StopReason::Budget : StopReason::None;
    c.rows.push_back(r);
  }
  const std::string text = curve_to_csv(c);
  const LearningCurve back = curve_from_csv(text);
  CHECK(curve_to_csv(back) == text);
  CHECK(back.strategy == StrategyKind::DOWAL);
  CHECK(std::isnan(back.rows[0].cv_mse));
  CHECK(back.rows[3].stop_reason == StopReason::Budget);
  CHECK(back.rows[2].fit_loglik == c.rows[2].fit_loglik);

  CHECK_THROWS_AS((void)curve_from_csv("a,b\n1,2\n"), Error);
  const std::string cut = text.substr(0, text.find('\n') + 1) + "0,11,dowal,-1\n";
  CHECK_THROWS_AS((void)curve_from_csv(cut), Error);
}

TEST_CASE("config round trip and unknown keys") {
  RunConfig c;
  c.seed = 77;
  c.q = 3;
  c.p = 2;
  c.threshold = std::numeric_limits<double>::infinity();
  c.strategies = {StrategyKind::Random, StrategyKind::ExpectedImprovement};
  c.weights = Eigen::Vector2d(0.25, 0.75);
  c.oracle.theta = 0.5;
  c.oracle_seed = 12;
  c.isotropic = true;
  const Json j = Json::parse(config_to_json(c).dump());
  const RunConfig back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());
  CHECK(std::isinf(back.threshold));
  CHECK(back.isotropic);

  Json bad = j;
  bad["n_itr"] = 3;
  try {
    (void)config_from_json(bad);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  Json bad_strategy = j;
  bad_strategy["strategies"] = {"vwal", "bogus"};
  CHECK_THROWS_AS((void)config_from_json(bad_strategy), Error);
}

TEST_CASE("config validation") {
  auto rejects = [](auto mutate) {
    RunConfig c;
    mutate(c);
    try {
      validate_config(c);
      return false;
    } catch (const Error& e) {
      return e.code() == ErrorCode::ConfigError;
    }
  };
  CHECK(rejects([](RunConfig& c) { c.lo = c.hi; }));
  CHECK(rejects([](RunConfig& c) { c.n_iter = -1; }));
  CHECK(rejects([](RunConfig& c) { c.patience = 0; }));
  CHECK(rejects([](RunConfig& c) { c.threshold = std::nan(""); }));
  CHECK(rejects([](RunConfig& c) { c.strategies = {StrategyKind::VWAL, StrategyKind::VWAL}; }));
  CHECK(rejects([](RunConfig& c) { c.weights = Eigen::VectorXd::Ones(3); }));
  CHECK(rejects([](RunConfig& c) { c.weights = -Eigen::VectorXd::Ones(6); }));

  RunConfig c;
  c.weights = Eigen::VectorXd::Constant(6, 2.0);
  validate_config(c);
  CHECK(c.weights.sum() == doctest::Approx(1.0).epsilon(1e-15));
}
