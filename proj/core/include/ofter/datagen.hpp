#pragma once

#include <cstdint>
#include <string>

#include "ofter/frame.hpp"

namespace ofter::datagen {

enum class Model { M1, M2, M3, Toy };

std::string to_string(Model model);
Model parse_model(const std::string& name);  // "m1", "m2", "m3", "toy" (case-insensitive)

struct SyntheticSpec {
  Model model = Model::M1;
  Eigen::Index t_len = 3000;
  double sigma = 0.0;        // toy noise sd
  double noise_scale = 1.0;  // multiplies the unit innovations of M1-M3; 0 gives the noiseless recursion
  std::uint64_t seed = 0;

  void validate() const;
};

// Columns y1..y5 for M1-M3, a single column y for the toy cosine.
// Column j draws from its own mt19937_64 stream seeded with seed_seq{seed_lo, seed_hi, j}.
frame::TimePanel generate(const SyntheticSpec& spec);

// Leading rows held at zero before the recursion starts.
Eigen::Index initial_rows(Model model);

}  // namespace ofter::datagen
