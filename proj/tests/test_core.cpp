#include <doctest.h>

#include <cmath>
#include <limits>

#include "activegp/core.hpp"
#include "activegp/error.hpp"

using namespace activegp;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an activegp::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("bounds map to the unit cube and back") {
  const Bounds b = Bounds::uniform(3);
  const ForcePoint f = Eigen::Vector3d(-450.0, 0.0, 225.0);
  const Eigen::VectorXd u = b.to_unit(f);
  CHECK(u[0] == doctest::Approx(0.0));
  CHECK(u[1] == doctest::Approx(0.5));
  CHECK(u[2] == doctest::Approx(0.75));
  CHECK((b.from_unit(u) - f).norm() < 1e-12);
  CHECK(b.contains(f));
  CHECK_FALSE(b.contains(Eigen::Vector3d(451.0, 0.0, 0.0)));
  CHECK(b.clamp(Eigen::Vector3d(500.0, -500.0, 1.0)) == Eigen::Vector3d(450.0, -450.0, 1.0));
}

TEST_CASE("degenerate bounds are rejected") {
  Bounds b = Bounds::uniform(2);
  b.hi[1] = b.lo[1];
  CHECK(code_of([&] { validate_bounds(b); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("hyperparameters pack and unpack in the documented order") {
  ModelSpec s = ModelSpec::make(ModelVariant::SurrogateWithUncertainties, 2, 1);
  Hyperparameters hp;
  hp.tau2 = 1.5;
  hp.theta = Eigen::Vector2d(0.3, 0.7);
  hp.sigma2 = 0.1;
  hp.phi2 = 0.02;
  const Eigen::VectorXd v = hp.pack(s);
  REQUIRE(v.size() == 5);
  CHECK(v[0] == 1.5);
  CHECK(v[1] == 0.3);
  CHECK(v[2] == 0.7);
  CHECK(v[3] == 0.1);
  CHECK(v[4] == 0.02);
  const Hyperparameters back = Hyperparameters::unpack(s, v);
  CHECK(back.theta == hp.theta);
  CHECK(back.phi2 == hp.phi2);
  CHECK(parameter_labels(s) == std::vector<std::string>{"tau2", "theta_1", "theta_2", "sigma2", "phi2"});

  s.isotropic = true;
  CHECK(s.parameter_count() == 4);
  CHECK(ModelSpec::make(ModelVariant::StochasticKriging, 3, 1).parameter_count() == 5);
}

TEST_CASE("model spec validation") {
  ModelSpec s = ModelSpec::make(ModelVariant::StochasticKriging, 2, 2);
  CHECK_NOTHROW(validate_model_spec(s));
  s.weights = Eigen::Vector2d(0.7, 0.7);
  CHECK_THROWS_AS(validate_model_spec(s), Error);
  s.weights = Eigen::Vector2d(0.5, 0.5);
  s.sigma_F = Eigen::Matrix2d{{1.0, 2.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(validate_model_spec(s), Error);
  s.sigma_F = Eigen::Matrix2d{{1.0, 0.0}, {0.0, -1.0}};
  CHECK_THROWS_AS(validate_model_spec(s), Error);
}

TEST_CASE("sample means follow the replicates") {
  const Bounds b = Bounds::uniform(1);
  DesignMatrix F(2, 1);
  F << -100.0, 100.0;
  std::vector<Eigen::MatrixXd> y{Eigen::MatrixXd(2, 1), Eigen::MatrixXd(1, 1)};
  y[0] << 1.0, 3.0;
  y[1] << 5.0;
  const Dataset d = make_dataset(b, F, y);
  CHECK(d.replications[0] == 2);
  CHECK(d.sample_means(0, 0) == 2.0);
  CHECK(d.sample_means(1, 0) == 5.0);
  CHECK_NOTHROW(validate_dataset(d));
}

TEST_CASE("dataset validation reports the right code") {
  const Bounds b = Bounds::uniform(1);
  DesignMatrix F(2, 1);
  F << -100.0, 100.0;
  Eigen::MatrixXd y(2, 1);
  y << 1.0, 2.0;

  Dataset d = make_dataset(b, F, y);
  d.sample_means(0, 0) = 1.5;
  CHECK(code_of([&] { validate_dataset(d); }) == ErrorCode::MeanInconsistent);

  d = make_dataset(b, F, y);
  d.responses[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
  d.sample_means(1, 0) = d.responses[1](0, 0);
  CHECK(code_of([&] { validate_dataset(d); }) == ErrorCode::NonFiniteValue);

  DesignMatrix out(2, 1);
  out << -100.0, 500.0;
  CHECK(code_of([&] { validate_dataset(make_dataset(b, out, y)); }) == ErrorCode::OutOfBounds);

  DesignMatrix dup(2, 1);
  dup << 100.0, 100.0;
  CHECK(code_of([&] { validate_dataset(make_dataset(b, dup, y)); }) == ErrorCode::DuplicatePoint);
}

TEST_CASE("append and remove are inverse") {
  const Bounds b = Bounds::uniform(2);
  DesignMatrix F(2, 2);
  F << 1.0, 2.0, 3.0, 4.0;
  Eigen::MatrixXd y(2, 1);
  y << 1.0, 2.0;
  const Dataset d = make_dataset(b, F, y);
  Eigen::MatrixXd r(2, 1);
  r << 7.0, 9.0;
  const Dataset e = append_point(d, Eigen::Vector2d(5.0, 6.0), r);
  CHECK(e.k() == 3);
  CHECK(e.replications[2] == 2);
  CHECK(e.sample_means(2, 0) == 8.0);
  CHECK(remove_point(e, 2) == d);
  const Dataset f = remove_point(e, 0);
  CHECK(f.design(0, 0) == 3.0);
  CHECK(f.k() == 2);
}

TEST_CASE("error messages carry the code name") {
  const Error e(ErrorCode::EmptyPool, "nothing left");
  CHECK(std::string(e.what()).find("EmptyPool") != std::string::npos);
}
