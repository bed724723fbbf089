#include "ldnn/prior.hpp"

#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ldnn {
namespace {

// One (V-block, Theta-block) draw. Theta is drawn before V so the stream
// layout is fixed; the cloud sampler and the signal materializer share this
// routine, which is what makes the finite-d signal an honest sample of the
// same block law the particle cloud represents.
class BlockSampler {
 public:
  BlockSampler(const PriorSpec& prior, int b) : prior_(prior), b_(b), coin_(0.0) {
    if (b <= 0) throw std::invalid_argument("block size must be positive");
    if (prior.kind == PriorKind::kParticleFile) {
      rows_ = load_particle_rows(prior.path, b);
      pick_row_ = std::uniform_int_distribution<Eigen::Index>(0, rows_.v.rows() - 1);
    } else if (prior.kind == PriorKind::kBernoulli || prior.kind == PriorKind::kGroupBernoulli) {
      coin_ = std::bernoulli_distribution(prior.p);
    }
  }

  void draw(Rng& rng, double* v, double* theta) {
    switch (prior_.kind) {
      case PriorKind::kBernoulli:
        for (int j = 0; j < b_; ++j) theta[j] = coin_(rng) ? 1.0 : 0.0;
        break;
      case PriorKind::kGroupBernoulli: {
        const double value = coin_(rng) ? 1.0 : 0.0;
        for (int j = 0; j < b_; ++j) theta[j] = value;
        break;
      }
      case PriorKind::kGaussian:
        for (int j = 0; j < b_; ++j) theta[j] = prior_.mean + prior_.stddev * normal_(rng);
        break;
      case PriorKind::kPointMass:
        for (int j = 0; j < b_; ++j) theta[j] = prior_.value;
        break;
      case PriorKind::kParticleFile: {
        const Eigen::Index r = pick_row_(rng);
        for (int j = 0; j < b_; ++j) {
          v[j] = rows_.v(r, j);
          theta[j] = rows_.theta(r, j);
        }
        return;  // the file row carries V as well
      }
    }
    switch (prior_.init.kind) {
      case InitKind::kOnes:
        for (int j = 0; j < b_; ++j) v[j] = 1.0;
        break;
      case InitKind::kConstant:
        for (int j = 0; j < b_; ++j) v[j] = prior_.init.value;
        break;
      case InitKind::kGaussian:
        for (int j = 0; j < b_; ++j) v[j] = prior_.init.stddev * normal_(rng);
        break;
    }
  }

 private:
  const PriorSpec& prior_;
  int b_;
  ParticleRows rows_;
  std::uniform_int_distribution<Eigen::Index> pick_row_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::bernoulli_distribution coin_;
};

}  // namespace

ParticleRows load_particle_rows(const std::string& path, int b) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read particle file '" + path + "'");
  std::vector<double> values;
  std::size_t n_rows = 0;
  std::string line;
  const std::size_t want = 2 * static_cast<std::size_t>(b);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t got = 0;
    while (std::getline(ls, cell, ',')) {
      std::size_t pos = 0;
      double x = 0.0;
      try {
        x = std::stod(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
      if (pos != cell.size() || cell.empty()) {
        throw std::runtime_error("particle file '" + path + "' row " + std::to_string(n_rows + 1) +
                                 ": malformed value '" + cell + "'");
      }
      values.push_back(x);
      ++got;
    }
    if (got != want) {
      throw std::runtime_error("particle file '" + path + "' row " + std::to_string(n_rows + 1) +
                               ": expected " + std::to_string(want) + " columns, got " +
                               std::to_string(got));
    }
    ++n_rows;
  }
  if (n_rows == 0) throw std::runtime_error("particle file '" + path + "' has no rows");

  ParticleRows rows;
  rows.v.resize(static_cast<Eigen::Index>(n_rows), b);
  rows.theta.resize(static_cast<Eigen::Index>(n_rows), b);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (int j = 0; j < b; ++j) {
      rows.v(static_cast<Eigen::Index>(r), j) = values[r * want + j];
      rows.theta(static_cast<Eigen::Index>(r), j) = values[r * want + b + j];
    }
  }
  return rows;
}

ParticleCloud sample_prior_particles(const PriorSpec& prior, int b, std::int64_t count, Rng& rng) {
  if (count <= 0) throw std::invalid_argument("particle count must be positive");
  BlockSampler sampler(prior, b);
  ParticleCloud cloud;
  cloud.b = b;
  cloud.v.resize(count, b);
  cloud.theta.resize(count, b);
  std::vector<double> vb(b), tb(b);
  for (std::int64_t i = 0; i < count; ++i) {
    sampler.draw(rng, vb.data(), tb.data());
    for (int j = 0; j < b; ++j) {
      cloud.v(i, j) = vb[j];
      cloud.theta(i, j) = tb[j];
    }
  }
  return cloud;
}

void materialize_signal(const PriorSpec& prior, int d, int b, Rng& rng,
                        Eigen::VectorXd& theta_star, Eigen::VectorXd& v0) {
  if (d <= 0 || b <= 0 || d % b != 0) {
    throw std::invalid_argument("signal length must be a positive multiple of the block size");
  }
  BlockSampler sampler(prior, b);
  theta_star.resize(d);
  v0.resize(d);
  for (int start = 0; start < d; start += b) {
    sampler.draw(rng, v0.data() + start, theta_star.data() + start);
  }
}

}  // namespace ldnn
