#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "ldnn/prior.hpp"

using namespace ldnn;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& contents) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

PriorSpec bernoulli(double p) {
  PriorSpec prior;
  prior.kind = PriorKind::kBernoulli;
  prior.p = p;
  return prior;
}

}  // namespace

TEST_CASE("bernoulli cloud has the right first moment and ones init") {
  Rng rng = make_rng(123);
  const std::int64_t count = 1'000'000;
  const ParticleCloud cloud = sample_prior_particles(bernoulli(0.01), 1, count, rng);
  REQUIRE(cloud.count() == count);
  REQUIRE(cloud.b == 1);
  CHECK((cloud.v == 1.0).all());
  double ones = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double t = cloud.theta(i, 0);
    CHECK((t == 0.0 || t == 1.0));
    ones += t;
  }
  const double se = std::sqrt(0.01 * 0.99 / static_cast<double>(count));
  CHECK(std::fabs(ones / static_cast<double>(count) - 0.01) < 5.0 * se);
}

TEST_CASE("group bernoulli blocks are constant and hit p per block") {
  Rng rng = make_rng(77);
  PriorSpec prior;
  prior.kind = PriorKind::kGroupBernoulli;
  prior.p = 0.3;
  const std::int64_t count = 200'000;
  const int b = 4;
  const ParticleCloud cloud = sample_prior_particles(prior, b, count, rng);
  double active = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    for (int j = 1; j < b; ++j) CHECK(cloud.theta(i, j) == cloud.theta(i, 0));
    active += cloud.theta(i, 0);
  }
  const double se = std::sqrt(0.3 * 0.7 / static_cast<double>(count));
  CHECK(std::fabs(active / static_cast<double>(count) - 0.3) < 5.0 * se);
  CHECK((cloud.v == 1.0).all());
}

TEST_CASE("gaussian prior and gaussian init match their moments") {
  Rng rng = make_rng(5);
  PriorSpec prior;
  prior.kind = PriorKind::kGaussian;
  prior.mean = 0.5;
  prior.stddev = 2.0;
  prior.init.kind = InitKind::kGaussian;
  prior.init.stddev = 0.25;
  const std::int64_t count = 400'000;
  const ParticleCloud cloud = sample_prior_particles(prior, 1, count, rng);
  const double n = static_cast<double>(count);
  const double t_mean = cloud.theta.mean();
  const double t_var = (cloud.theta - t_mean).square().mean();
  CHECK(std::fabs(t_mean - 0.5) < 5.0 * 2.0 / std::sqrt(n));
  CHECK(std::fabs(t_var - 4.0) < 5.0 * 4.0 * std::sqrt(2.0 / n));
  const double v_mean = cloud.v.mean();
  const double v_var = (cloud.v - v_mean).square().mean();
  CHECK(std::fabs(v_mean) < 5.0 * 0.25 / std::sqrt(n));
  CHECK(std::fabs(v_var - 0.0625) < 5.0 * 0.0625 * std::sqrt(2.0 / n));
}

TEST_CASE("point mass with constant init is exactly constant") {
  Rng rng = make_rng(9);
  PriorSpec prior;
  prior.kind = PriorKind::kPointMass;
  prior.value = 1.5;
  prior.init.kind = InitKind::kConstant;
  prior.init.value = -0.5;
  const ParticleCloud cloud = sample_prior_particles(prior, 2, 100, rng);
  CHECK((cloud.theta == 1.5).all());
  CHECK((cloud.v == -0.5).all());
}

TEST_CASE("particle file round trip is exact") {
  const TempFile file("test_prior_rows.csv",
                      "1.0,0.0,0.25,-3.5\n"
                      "0.5,2.0,0.0,1e-3\n");
  const ParticleRows rows = load_particle_rows(file.path, 2);
  REQUIRE(rows.v.rows() == 2);
  CHECK(rows.v(0, 0) == 1.0);
  CHECK(rows.v(0, 1) == 0.0);
  CHECK(rows.theta(0, 0) == 0.25);
  CHECK(rows.theta(0, 1) == -3.5);
  CHECK(rows.v(1, 0) == 0.5);
  CHECK(rows.v(1, 1) == 2.0);
  CHECK(rows.theta(1, 0) == 0.0);
  CHECK(rows.theta(1, 1) == 1e-3);

  // Resampled particles carry (V, Theta) jointly from the file rows.
  PriorSpec prior;
  prior.kind = PriorKind::kParticleFile;
  prior.path = file.path;
  Rng rng = make_rng(31);
  const ParticleCloud cloud = sample_prior_particles(prior, 2, 500, rng);
  for (Eigen::Index i = 0; i < cloud.count(); ++i) {
    const bool is_row0 = cloud.v(i, 0) == 1.0;
    if (is_row0) {
      CHECK(cloud.v(i, 1) == 0.0);
      CHECK(cloud.theta(i, 0) == 0.25);
      CHECK(cloud.theta(i, 1) == -3.5);
    } else {
      CHECK(cloud.v(i, 0) == 0.5);
      CHECK(cloud.theta(i, 1) == 1e-3);
    }
  }
}

TEST_CASE("particle file errors name the row") {
  const TempFile bad_value("test_prior_bad_value.csv", "1.0,2.0\n1.0,oops\n");
  try {
    load_particle_rows(bad_value.path, 1);
    FAIL("expected malformed-value error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }

  const TempFile bad_width("test_prior_bad_width.csv", "1.0,2.0,3.0\n");
  try {
    load_particle_rows(bad_width.path, 1);
    FAIL("expected column-count error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("expected 2 columns, got 3") != std::string::npos);
  }

  const TempFile empty("test_prior_empty.csv", "\n\n");
  CHECK_THROWS_WITH_AS(load_particle_rows(empty.path, 1),
                       doctest::Contains("has no rows"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_particle_rows("/no/such/file.csv", 1),
                       doctest::Contains("cannot read"), std::runtime_error);
}

TEST_CASE("sampling is deterministic in the seed") {
  Rng a = make_rng(404), b = make_rng(404), c = make_rng(405);
  const PriorSpec prior = bernoulli(0.2);
  const ParticleCloud ca = sample_prior_particles(prior, 2, 1000, a);
  const ParticleCloud cb = sample_prior_particles(prior, 2, 1000, b);
  const ParticleCloud cc = sample_prior_particles(prior, 2, 1000, c);
  CHECK((ca.theta == cb.theta).all());
  CHECK((ca.v == cb.v).all());
  CHECK(!(ca.theta == cc.theta).all());
}

TEST_CASE("the finite signal and the particle cloud share one block law") {
  // Identical generator state must yield the identical block sequence whether
  // it is laid out as cloud rows or as a length-d signal.
  PriorSpec prior = bernoulli(0.5);
  prior.init.kind = InitKind::kGaussian;
  prior.init.stddev = 1.0;
  const int d = 64, b = 4;
  Rng cloud_rng = make_rng(2024);
  Rng signal_rng = make_rng(2024);
  const ParticleCloud cloud = sample_prior_particles(prior, b, d / b, cloud_rng);
  Eigen::VectorXd theta_star, v0;
  materialize_signal(prior, d, b, signal_rng, theta_star, v0);
  for (Eigen::Index i = 0; i < d / b; ++i) {
    for (int j = 0; j < b; ++j) {
      CHECK(theta_star[i * b + j] == cloud.theta(i, j));
      CHECK(v0[i * b + j] == cloud.v(i, j));
    }
  }
}

TEST_CASE("invalid shapes are rejected") {
  Rng rng = make_rng(1);
  Eigen::VectorXd theta_star, v0;
  CHECK_THROWS_AS(sample_prior_particles(bernoulli(0.5), 1, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(materialize_signal(bernoulli(0.5), 10, 3, rng, theta_star, v0),
                  std::invalid_argument);
}
