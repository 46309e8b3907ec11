#pragma once

#include <json.hpp>

#include "mixedspec/arithmetic.hpp"
#include "mixedspec/fourier.hpp"

namespace mixedspec {

/// Default analytic strip width (theta units) of the built-in f.
inline constexpr double kDefaultStrip = 0.5;

/// cos(2 pi theta) / (1 + 2 pi): zero mean, one mode, ||f||_{C^1} = 1.
FourierSeries default_f(double strip_h = kDefaultStrip);

enum class Normalization {
  /// ||f||_{C^1} = 1 within 1e-10 is enforced.
  unit_c1,
  /// Only zero mean and non-constancy are enforced (for hand-checkable
  /// examples such as f = cos(2 pi theta)).
  any,
};

/// The operator family: f, coupling K and frequency omega. The potential is
/// V(theta) = exp(K f(theta + omega)) + exp(-K f(theta)).
class ModelParams {
 public:
  ModelParams(FourierSeries f, double coupling, Frequency omega,
              Normalization norm = Normalization::unit_c1);

  const FourierSeries& f() const noexcept { return f_; }
  double coupling() const noexcept { return coupling_; }
  const Frequency& omega() const noexcept { return omega_; }
  double omega_value() const noexcept { return omega_.value(); }
  /// sup |f| on the real torus (grid search with refinement).
  double f_sup() const noexcept { return f_sup_; }

  ModelParams with_coupling(double coupling) const;
  ModelParams with_frequency(Frequency omega) const;

 private:
  FourierSeries f_;
  double coupling_;
  Frequency omega_;
  Normalization norm_;
  double f_sup_;
};

/// exp(K f(theta + omega)) + exp(-K f(theta)); strictly positive.
double potential(const ModelParams& params, double theta);

/// Potential with an explicit frequency value (used for rational
/// approximants, where omega is replaced by p/q in the same formula).
double potential_at(const FourierSeries& f, double coupling, double omega,
                    double theta);

/// Walks the orbit theta + k*omega and yields V at each point, reusing
/// f(theta + (k+1) omega) as the next step's f(theta + k omega).
class PotentialOrbit {
 public:
  PotentialOrbit(const FourierSeries& f, double coupling, double omega,
                 double theta);
  double next();
  /// Current orbit point theta + k*omega mod 1 (before the next call).
  double phase() const noexcept;

 private:
  const FourierSeries& f_;
  double coupling_;
  double omega_;
  double theta0_;
  long long k_ = 0;
  double f_next_;
};

nlohmann::json to_json(const ModelParams& params);
/// {"f": {"name": "default"} | series json, "K": .., "omega": frequency json
/// | string}, "normalization": "unit_c1" | "any"}
ModelParams model_from_json(const nlohmann::json& j);

}  // namespace mixedspec
