#include "sflock/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sflock {

namespace {

// The expm1/log1p form below has no cancellation for any representable
// beta != 1, so the logarithm is only needed at beta == 1 itself. A wider
// band would cost |beta-1| log(1+s)^2 / 2 of absolute accuracy.
bool log_branch(double beta) { return beta == 1.0; }

std::string collision_message(std::size_t left, std::size_t right, double slack) {
  std::ostringstream os;
  os << "collision between agents " << left << " and " << right << " (gap slack " << slack << ")";
  return os.str();
}

}  // namespace

CollisionError::CollisionError(std::size_t left, std::size_t right, double slack)
    : std::runtime_error(collision_message(left, right, slack)), left_(left), right_(right), slack_(slack) {}

void ModelParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (delta.empty()) throw std::invalid_argument("a string needs at least two agents");
  if (z.size() != delta.size()) throw std::invalid_argument("delta and z must both have N-1 entries");
  for (double d : delta) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("delta entries must be finite and non-negative");
  }
  for (double zi : z) {
    if (!std::isfinite(zi)) throw std::invalid_argument("z entries must be finite");
  }
}

void State::validate(const ModelParams& params) const {
  if (x.size() != params.n_agents() || v.size() != params.n_agents()) {
    throw std::invalid_argument("state size does not match the number of agents");
  }
  auto finite = [](double a) { return std::isfinite(a); };
  if (!std::isfinite(t) || !std::all_of(x.begin(), x.end(), finite) || !std::all_of(v.begin(), v.end(), finite)) {
    throw std::invalid_argument("state has non-finite entries");
  }
}

double psi(double r, double alpha) {
  if (!(r > 0.0)) throw std::domain_error("psi evaluated at a non-positive distance");
  return std::pow(r, -alpha);
}

double phi(double r, double beta) {
  if (!(r >= 0.0)) throw std::domain_error("phi evaluated at a negative argument");
  return std::pow(1.0 + r, -beta);
}

double phi_primitive(double s, double beta) {
  if (!(s >= 0.0)) throw std::domain_error("phi_primitive evaluated at a negative argument");
  if (log_branch(beta)) return std::log1p(s);
  // ((1+s)^(1-beta) - 1) / (1-beta) without cancellation.
  const double a = 1.0 - beta;
  return std::expm1(a * std::log1p(s)) / a;
}

double phi_primitive_inverse(double y, double beta) {
  if (!(y >= 0.0)) throw std::domain_error("phi_primitive_inverse evaluated at a negative argument");
  if (log_branch(beta)) return std::expm1(y);
  const double a = 1.0 - beta;
  if (beta > 1.0 && !(y < 1.0 / (beta - 1.0))) {
    throw std::range_error("value outside the range of the control potential");
  }
  return std::expm1(std::log1p(a * y) / a);
}

double phi_integral(double beta) {
  if (beta <= 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (beta - 1.0);
}

std::vector<double> gap_slacks(const State& state, const ModelParams& params) {
  const std::size_t links = params.delta.size();
  std::vector<double> out(links);
  for (std::size_t i = 0; i < links; ++i) out[i] = std::abs(state.x[i + 1] - state.x[i]) - params.delta[i];
  return out;
}

std::vector<double> formation_errors(const State& state, const ModelParams& params) {
  const std::size_t links = params.z.size();
  std::vector<double> out(links);
  for (std::size_t i = 0; i < links; ++i) out[i] = state.x[i] - state.x[i + 1] - params.z[i];
  return out;
}

bool rhs_into(const double* x, const double* v, const ModelParams& params, double* dv, std::size_t* bad_link) {
  const std::size_t n = params.n_agents();
  std::fill(dv, dv + n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slack = std::abs(x[i + 1] - x[i]) - params.delta[i];
    if (!(slack > 0.0)) {
      if (bad_link) *bad_link = i;
      return false;
    }
    const double align = std::pow(slack, -params.alpha) * (v[i + 1] - v[i]);
    dv[i] += align;
    dv[i + 1] -= align;
    if (params.control) {
      const double e = x[i] - x[i + 1] - params.z[i];
      const double pull = std::pow(1.0 + e * e, -params.beta) * e;
      dv[i] -= pull;
      dv[i + 1] += pull;
    }
  }
  return true;
}

Derivative rhs(const State& state, const ModelParams& params) {
  const std::size_t n = params.n_agents();
  Derivative d{state.v, std::vector<double>(n)};
  std::size_t bad = 0;
  if (!rhs_into(state.x.data(), state.v.data(), params, d.dv.data(), &bad)) {
    throw CollisionError(bad, bad + 1, std::abs(state.x[bad + 1] - state.x[bad]) - params.delta[bad]);
  }
  return d;
}

EnergyReport energy(const State& state, const ModelParams& params) {
  const std::size_t n = state.size();
  EnergyReport r;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = state.v[i] - state.v[j];
      pair_sum += d * d;
    }
  }
  // The double sum over (i, j) counts every unordered pair twice.
  r.e1 = 2.0 * pair_sum / (4.0 * static_cast<double>(n));

  double mean = 0.0;
  for (double vi : state.v) mean += vi;
  r.v_mean = mean / static_cast<double>(n);

  if (params.control) {
    double pot = 0.0;
    for (double e : formation_errors(state, params)) pot += phi_primitive(e * e, params.beta);
    r.e2 = 0.5 * pot;
  }
  r.e_total = r.e1 + r.e2;

  double diss = 0.0;
  bool defined = true;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slack = std::abs(state.x[i + 1] - state.x[i]) - params.delta[i];
    if (!(slack > 0.0)) {
      defined = false;
      break;
    }
    const double dvel = state.v[i + 1] - state.v[i];
    diss += std::pow(slack, -params.alpha) * dvel * dvel;
  }
  if (defined) r.dissipation = diss;
  return r;
}

double modified_energy(const State& state, const ModelParams& params, double gamma) {
  double cross = 0.0;
  const auto err = formation_errors(state, params);
  for (std::size_t i = 0; i < err.size(); ++i) cross += err[i] * (state.v[i] - state.v[i + 1]);
  return gamma * energy(state, params).e_total + cross;
}

Diagnostics diagnostics(const State& state, const ModelParams& params) {
  Diagnostics d;
  const auto slacks = gap_slacks(state, params);
  d.min_gap_slack = *std::min_element(slacks.begin(), slacks.end());
  for (double e : formation_errors(state, params)) d.formation_error = std::max(d.formation_error, std::abs(e));
  const auto [lo, hi] = std::minmax_element(state.v.begin(), state.v.end());
  d.velocity_diameter = *hi - *lo;
  return d;
}

}  // namespace sflock
