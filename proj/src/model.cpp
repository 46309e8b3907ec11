#include "mixedspec/model.hpp"

#include <cmath>
#include <numbers>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "fourier";

double wrap(double x) { return x - std::floor(x); }

}  // namespace

FourierSeries default_f(double strip_h) {
  return FourierSeries::cosine(1.0 / (1.0 + 2.0 * std::numbers::pi), strip_h);
}

ModelParams::ModelParams(FourierSeries f, double coupling, Frequency omega,
                         Normalization norm)
    : f_(std::move(f)),
      coupling_(coupling),
      omega_(std::move(omega)),
      norm_(norm),
      f_sup_(0.0) {
  if (!std::isfinite(coupling_))
    throw DomainError(kModule, "model", "coupling must be finite");
  if (std::abs(f_.mean()) > 1e-14)
    throw DomainError(kModule, "model", "f must have zero mean");
  double energy = 0.0;
  for (int k = 1; k <= f_.order(); ++k) energy += std::norm(f_.coeff(k));
  if (energy == 0.0) throw DomainError(kModule, "model", "f must be non-constant");
  f_sup_ = sup_norm(f_);
  if (norm_ == Normalization::unit_c1) {
    const double c1 = c1_norm(f_);
    if (std::abs(c1 - 1.0) > 1e-10)
      throw DomainError(kModule, "model",
                        "||f||_C1 = " + std::to_string(c1) + ", expected 1");
  }
}

ModelParams ModelParams::with_coupling(double coupling) const {
  ModelParams copy = *this;
  if (!std::isfinite(coupling))
    throw DomainError(kModule, "model", "coupling must be finite");
  copy.coupling_ = coupling;
  return copy;
}

ModelParams ModelParams::with_frequency(Frequency omega) const {
  ModelParams copy = *this;
  copy.omega_ = std::move(omega);
  return copy;
}

double potential_at(const FourierSeries& f, double coupling, double omega,
                    double theta) {
  return std::exp(coupling * f(wrap(theta + omega))) +
         std::exp(-coupling * f(wrap(theta)));
}

double potential(const ModelParams& params, double theta) {
  return potential_at(params.f(), params.coupling(), params.omega_value(), theta);
}

PotentialOrbit::PotentialOrbit(const FourierSeries& f, double coupling,
                               double omega, double theta)
    : f_(f), coupling_(coupling), omega_(omega), theta0_(theta) {
  f_next_ = f_(wrap(theta0_));
}

double PotentialOrbit::phase() const noexcept {
  return wrap(theta0_ + static_cast<double>(k_) * omega_);
}

double PotentialOrbit::next() {
  const double f_here = f_next_;
  ++k_;
  f_next_ = f_(wrap(theta0_ + static_cast<double>(k_) * omega_));
  return std::exp(coupling_ * f_next_) + std::exp(-coupling_ * f_here);
}

nlohmann::json to_json(const ModelParams& params) {
  return {{"f", to_json(params.f())},
          {"K", params.coupling()},
          {"omega", to_json(params.omega())}};
}

ModelParams model_from_json(const nlohmann::json& j) {
  const double strip = j.value("h", kDefaultStrip);
  FourierSeries f = default_f(strip);
  Normalization norm = Normalization::unit_c1;
  if (j.contains("f")) {
    const auto& jf = j.at("f");
    if (jf.is_string()) {
      const auto name = jf.get<std::string>();
      if (name == "cos") {
        f = FourierSeries::cosine(1.0, strip);
        norm = Normalization::any;
      } else if (name != "default") {
        throw DomainError(kModule, "model", "unknown f '" + name + "'");
      }
    } else {
      f = series_from_json(jf);
    }
  }
  if (j.contains("normalization"))
    norm = j.at("normalization").get<std::string>() == "any" ? Normalization::any
                                                             : Normalization::unit_c1;
  Frequency omega = Frequency::golden_mean();
  if (j.contains("omega")) {
    const auto& jo = j.at("omega");
    omega = jo.is_string() ? parse_frequency(jo.get<std::string>())
                           : frequency_from_json(jo);
  }
  return ModelParams(std::move(f), j.value("K", 0.0), std::move(omega), norm);
}

}  // namespace mixedspec
