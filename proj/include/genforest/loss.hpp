#pragma once

#include <optional>
#include <string_view>

namespace genforest {

enum class LossKind { Square, Log, Matusita };

/// Strictly proper loss for the binary real-vs-uniform task, given by its
/// partial losses. Class +1 is "real".
class Loss {
 public:
  explicit Loss(LossKind kind = LossKind::Square) : kind_(kind) {}

  static std::optional<Loss> from_name(std::string_view name);

  LossKind kind() const { return kind_; }
  std::string_view name() const;

  double partial_pos(double u) const;  // loss on class +1 when predicting u
  double partial_neg(double u) const;  // loss on class -1 when predicting u

  /// Pointwise Bayes risk L(u) = u*partial_pos(u) + (1-u)*partial_neg(u),
  /// in closed form with 0*log(0) = 0. Throws std::domain_error outside [0, 1].
  double bayes_risk(double u) const;

  /// Lower bound on partial_neg'(u) - partial_pos'(u) over (0, 1).
  double kappa() const;

 private:
  LossKind kind_;
};

/// Contribution of one cell to the expected Bayes risk: with mixture mass
/// pm = pi*r + (1-pi)*u, returns pm * L(pi*r/pm), or 0 when pm == 0.
double cell_risk(const Loss& loss, double pi, double r, double u);

}  // namespace genforest
