#pragma once

// Hand-rolled generators for property tests.

#include <cstdint>
#include <random>
#include <utility>

#include "sflock/model.hpp"

namespace gen {

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  bool coin() { return integer(0, 1) == 1; }
};

inline sflock::ModelParams params(Rng& r, std::size_t n) {
  sflock::ModelParams p;
  p.alpha = r.uniform(0.5, 3.5);
  p.beta = r.uniform(0.3, 4.5);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    p.delta.push_back(r.uniform(0.0, 2.0));
    p.z.push_back(r.uniform(-5.0, 5.0));
  }
  p.control = r.integer(0, 4) != 0;
  return p;
}

// Ordered or shuffled-direction positions with every gap slack in [0.05, 3].
inline sflock::State state(Rng& r, const sflock::ModelParams& p) {
  const std::size_t n = p.n_agents();
  sflock::State s;
  s.x.resize(n);
  s.v.resize(n);
  s.x[0] = r.uniform(-10.0, 10.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = p.delta[i] + r.uniform(0.05, 3.0);
    s.x[i + 1] = s.x[i] + (r.coin() ? gap : -gap);
  }
  for (auto& v : s.v) v = r.uniform(-2.0, 2.0);
  return s;
}

inline std::pair<sflock::ModelParams, sflock::State> case_(Rng& r) {
  auto p = params(r, static_cast<std::size_t>(r.integer(2, 12)));
  auto s = state(r, p);
  return {p, s};
}

}  // namespace gen
