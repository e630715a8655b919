#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sflock {

/// Parameters of a string of N agents on the line.
///
/// `delta[i]` and `z[i]` describe the link between agent i and agent i+1
/// (zero-based): `delta` is the exclusion radius of the singular alignment
/// kernel and `z` the target value of `x[i] - x[i+1]`.
struct ModelParams {
  double alpha = 2.0;  // singular kernel exponent
  double beta = 1.0;   // control kernel exponent
  std::vector<double> delta;
  std::vector<double> z;
  bool control = true;  // false zeroes the formation feedback

  std::size_t n_agents() const { return delta.size() + 1; }

  /// Throws std::invalid_argument when an invariant is broken.
  /// delta entries may be zero; the kernel stays singular at coincidence.
  void validate() const;
};

struct State {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;

  std::size_t size() const { return x.size(); }
  void validate(const ModelParams& params) const;
};

struct Derivative {
  std::vector<double> dx;
  std::vector<double> dv;
};

struct EnergyReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double e_total = 0.0;
  std::optional<double> dissipation;  // empty when a gap has collapsed
  double v_mean = 0.0;
  std::optional<double> e_gamma;
};

struct Diagnostics {
  double min_gap_slack = 0.0;
  double formation_error = 0.0;
  double velocity_diameter = 0.0;
};

/// Raised when a kernel is evaluated at a collapsed gap.
class CollisionError : public std::runtime_error {
 public:
  CollisionError(std::size_t left, std::size_t right, double slack);
  std::pair<std::size_t, std::size_t> agents() const { return {left_, right_}; }
  double slack() const { return slack_; }

 private:
  std::size_t left_;
  std::size_t right_;
  double slack_;
};

// Kernels. psi is singular at 0, phi is bounded by 1.
double psi(double r, double alpha);
double phi(double r, double beta);
/// Primitive of phi, integrated from 0.
double phi_primitive(double s, double beta);
/// Inverse of phi_primitive; throws std::range_error outside its range.
double phi_primitive_inverse(double y, double beta);
/// Supremum of phi_primitive, +inf for beta <= 1.
double phi_integral(double beta);

/// |x[i+1] - x[i]| - delta[i] for each link.
std::vector<double> gap_slacks(const State& state, const ModelParams& params);
/// x[i] - x[i+1] - z[i] for each link.
std::vector<double> formation_errors(const State& state, const ModelParams& params);

Derivative rhs(const State& state, const ModelParams& params);
/// Allocation-free variant used by the integrators. Returns false (and leaves
/// `dv` unspecified) when some gap slack is not positive; `bad_link` then
/// receives the offending link index.
bool rhs_into(const double* x, const double* v, const ModelParams& params, double* dv,
              std::size_t* bad_link = nullptr);

EnergyReport energy(const State& state, const ModelParams& params);
double modified_energy(const State& state, const ModelParams& params, double gamma);
Diagnostics diagnostics(const State& state, const ModelParams& params);

}  // namespace sflock
