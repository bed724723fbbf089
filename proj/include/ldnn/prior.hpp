#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ldnn/config.hpp"
#include "ldnn/rng.hpp"

namespace ldnn {

// Finite sample of paired (V, Theta) blocks standing in for their joint law.
// One block per row; column j holds coordinate j of every block.
struct ParticleCloud {
  int b = 1;
  Eigen::ArrayXXd v;      // count x b
  Eigen::ArrayXXd theta;  // count x b
  Eigen::Index count() const { return v.rows(); }
};

// Rows loaded from a particle file: CSV with 2b numeric columns per row,
// V_1..V_b,Theta_1..Theta_b, no header.
struct ParticleRows {
  Eigen::ArrayXXd v;
  Eigen::ArrayXXd theta;
};
ParticleRows load_particle_rows(const std::string& path, int b);

// Draws `count` i.i.d. (V-block, Theta-block) pairs. particle_file priors
// resample file rows with replacement.
ParticleCloud sample_prior_particles(const PriorSpec& prior, int b, std::int64_t count, Rng& rng);

// Fills theta_star and v0 (length d) with d/b i.i.d. blocks from the same
// block law the particle sampler uses.
void materialize_signal(const PriorSpec& prior, int d, int b, Rng& rng,
                        Eigen::VectorXd& theta_star, Eigen::VectorXd& v0);

}  // namespace ldnn
