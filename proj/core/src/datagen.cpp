#include "ofter/datagen.hpp"

#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ofter/error.hpp"

namespace ofter::datagen {

namespace {

constexpr std::string_view kModule = "datagen";

using Index = Eigen::Index;

Eigen::MatrixXd innovations(Index rows, Index cols, std::uint64_t seed, double scale) {
  Eigen::MatrixXd eps(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(j)};
    std::mt19937_64 gen(seq);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < rows; ++i) eps(i, j) = scale * normal(gen);
  }
  return eps;
}

double bump(double x) {
  const double e = std::exp(-x * x);
  return 3.4 * x * (1.0 - e) * e;
}

}  // namespace

std::string to_string(Model model) {
  switch (model) {
    case Model::M1: return "m1";
    case Model::M2: return "m2";
    case Model::M3: return "m3";
    case Model::Toy: return "toy";
  }
  return "m1";
}

Model parse_model(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "m1") return Model::M1;
  if (lower == "m2") return Model::M2;
  if (lower == "m3") return Model::M3;
  if (lower == "toy") return Model::Toy;
  throw Error(kModule, "unknown model '" + name + "' (expected m1, m2, m3 or toy)");
}

Index initial_rows(Model model) { return model == Model::M3 ? 3 : model == Model::Toy ? 0 : 1; }

void SyntheticSpec::validate() const {
  if (t_len < 10) throw Error(kModule, "series length must be at least 10");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(kModule, "sigma must be a finite non-negative number");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
    throw Error(kModule, "noise_scale must be a finite non-negative number");
}

frame::TimePanel generate(const SyntheticSpec& spec) {
  spec.validate();
  const Index T = spec.t_len;
  if (spec.model == Model::Toy) {
    const Eigen::MatrixXd eps = innovations(T, 1, spec.seed, spec.sigma);
    Eigen::MatrixXd y(T, 1);
    for (Index t = 0; t < T; ++t)
      y(t, 0) = 0.5 + std::cos(std::numbers::pi * static_cast<double>(t) / 64.0) + eps(t, 0);
    return frame::make_panel(std::move(y), {"y"});
  }

  const Eigen::MatrixXd e = innovations(T, 5, spec.seed, spec.noise_scale);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(T, 5);
  for (Index t = initial_rows(spec.model); t < T; ++t) {
    switch (spec.model) {
      case Model::M1: {
        const double a = y(t - 1, 0), b = y(t - 1, 1);
        y(t, 0) = 0.2 * a - 0.4 * b + e(t, 0);
        y(t, 1) = -0.5 * a + 0.15 * b + e(t, 1);
        y(t, 2) = -0.14 * b + e(t, 2);
        y(t, 3) = 0.5 * a - 0.25 * b + e(t, 3);
        y(t, 4) = 0.15 * a + e(t, 4);
        break;
      }
      case Model::M2: {
        const double a = y(t - 1, 0), b = y(t - 1, 1), c = y(t - 1, 2);
        y(t, 0) = bump(a) + e(t, 0);
        y(t, 1) = bump(b) + 0.5 * a * b + e(t, 1);
        y(t, 2) = bump(c) + 0.3 * b + 0.5 * a * a + e(t, 2);
        y(t, 3) = 0.5 * a - 0.25 * b + e(t, 3);
        y(t, 4) = 0.15 * a + e(t, 4);
        break;
      }
      case Model::M3: {
        y(t, 0) = 0.1 * y(t - 1, 0) - 0.6 * y(t - 3, 1) + e(t, 0);
        y(t, 1) = -0.15 * y(t - 3, 0) + 0.8 * y(t - 3, 1) + e(t, 1);
        y(t, 2) = -0.45 * y(t - 3, 1) + e(t, 2);
        y(t, 3) = 0.45 * y(t - 3, 0) - 0.85 * y(t - 3, 1) + e(t, 3);
        y(t, 4) = 0.95 * y(t - 2, 0) + e(t, 4);
        break;
      }
      case Model::Toy: break;
    }
  }
  return frame::make_panel(std::move(y), {"y1", "y2", "y3", "y4", "y5"});
}

}  // namespace ofter::datagen
