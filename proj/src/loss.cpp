#include "genforest/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace genforest {

std::optional<Loss> Loss::from_name(std::string_view name) {
  if (name == "square") return Loss(LossKind::Square);
  if (name == "log") return Loss(LossKind::Log);
  if (name == "matusita") return Loss(LossKind::Matusita);
  return std::nullopt;
}

std::string_view Loss::name() const {
  switch (kind_) {
    case LossKind::Square:
      return "square";
    case LossKind::Log:
      return "log";
    case LossKind::Matusita:
      return "matusita";
  }
  return "?";
}

double Loss::partial_pos(double u) const {
  switch (kind_) {
    case LossKind::Square:
      return (1 - u) * (1 - u);
    case LossKind::Log:
      return -std::log(u);
    case LossKind::Matusita:
      return std::sqrt((1 - u) / u);
  }
  return 0;
}

double Loss::partial_neg(double u) const {
  switch (kind_) {
    case LossKind::Square:
      return u * u;
    case LossKind::Log:
      return -std::log1p(-u);
    case LossKind::Matusita:
      return std::sqrt(u / (1 - u));
  }
  return 0;
}

double Loss::bayes_risk(double u) const {
  constexpr double kSlack = 1e-12;
  if (!(u >= -kSlack && u <= 1 + kSlack)) throw std::domain_error("Bayes risk argument outside [0, 1]");
  u = std::clamp(u, 0.0, 1.0);
  switch (kind_) {
    case LossKind::Square:
      return u * (1 - u);
    case LossKind::Log: {
      auto xlogx = [](double x) { return x > 0 ? x * std::log(x) : 0.0; };
      return -xlogx(u) - xlogx(1 - u);
    }
    case LossKind::Matusita:
      return 2 * std::sqrt(u * (1 - u));
  }
  return 0;
}

double Loss::kappa() const {
  switch (kind_) {
    case LossKind::Square:
      return 2;
    case LossKind::Log:
    case LossKind::Matusita:
      return 4;
  }
  return 0;
}

double cell_risk(const Loss& loss, double pi, double r, double u) {
  const double pm = pi * r + (1 - pi) * u;
  if (pm <= 0) return 0;
  return pm * loss.bayes_risk(pi * r / pm);
}

}  // namespace genforest
