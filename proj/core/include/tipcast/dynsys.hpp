#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tipcast/random.hpp"

namespace tipcast {

inline constexpr int kMaxStateDim = 3;

using StateVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxStateDim, 1>;
using JacobianMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxStateDim, kMaxStateDim>;

StateVector make_state(std::initializer_list<double> values);

/// Random planar cubic. Coefficients are ordered over the monomial basis
/// (1, x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3); index i < 10 addresses a[i],
/// index i >= 10 addresses b[i - 10].
struct PolynomialSystem2D {
  static constexpr int kTerms = 10;
  static constexpr int kCoefficients = 20;

  std::array<double, kTerms> a{};
  std::array<double, kTerms> b{};
  int bif_param_index = 0;

  double coefficient(int index) const;
  void set_coefficient(int index, double value);
  /// The value of the designated bifurcation coefficient.
  double mu() const { return coefficient(bif_param_index); }
  PolynomialSystem2D with_bif_param(int index) const;
  /// Coefficient indices that are nonzero, ascending.
  std::vector<int> nonzero_indices() const;
  static bool is_cubic_index(int index);
  /// Throws ArgumentError when the generation invariants do not hold.
  void validate() const;

  /// Drift with the designated coefficient replaced by mu.
  StateVector rhs(const StateVector& s, double mu) const;
  JacobianMatrix analytic_jacobian(const StateVector& s, double mu) const;
};

enum class ModelId {
  may_fold,
  food_chain_hopf,
  rosenzweig_transcritical,
  energy_balance_fold,
  pleistocene_hopf,
  triffid_transcritical,
  sleep_wake_hysteresis,
  sprott_b_hysteresis,
};

std::string_view to_string(ModelId id);
ModelId model_id_from_string(std::string_view name);
const std::vector<ModelId>& all_model_ids();

/// One of the eight benchmark models with its parameter table.
class NamedModel {
 public:
  explicit NamedModel(ModelId id);
  /// Overrides must name existing symbols.
  NamedModel(ModelId id, const std::map<std::string, double>& overrides);

  ModelId id() const { return id_; }
  int state_dim() const;
  std::string_view bif_param_name() const;
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& name) const;

  /// Drift with the bifurcation parameter replaced by mu.
  StateVector rhs(const StateVector& s, double mu) const;

 private:
  void pack();

  ModelId id_;
  std::map<std::string, double> params_;
  std::array<double, 12> packed_{};
};

enum class NormalFormKind { fold, hopf_supercritical, hopf_subcritical, transcritical };

/// Textbook normal forms, used as oracles.
///   fold:          dx/dt = mu + x^2
///   hopf (super):  dx/dt = mu x - y - x(x^2+y^2), dy/dt = x + mu y - y(x^2+y^2)
///   hopf (sub):    same with the cubic sign flipped
///   transcritical: dx/dt = mu x - x^2
struct NormalForm {
  NormalFormKind kind = NormalFormKind::fold;
  int state_dim() const;
  StateVector rhs(const StateVector& s, double mu) const;
  JacobianMatrix analytic_jacobian(const StateVector& s, double mu) const;
};

/// Arbitrary drift supplied as a callable. If `jacobian` is empty the
/// finite-difference Jacobian is used.
struct CustomSystem {
  int dim = 1;
  std::function<StateVector(const StateVector&, double)> rhs;
  std::function<JacobianMatrix(const StateVector&, double)> jacobian;
  std::string name = "custom";
};

class DynamicalSystem {
 public:
  using Variant = std::variant<PolynomialSystem2D, NamedModel, NormalForm, CustomSystem>;

  DynamicalSystem(PolynomialSystem2D s) : v_(std::move(s)) {}  // NOLINT
  DynamicalSystem(NamedModel s) : v_(std::move(s)) {}          // NOLINT
  DynamicalSystem(NormalForm s) : v_(s) {}                     // NOLINT
  DynamicalSystem(CustomSystem s);                             // NOLINT

  int state_dim() const;
  std::string name() const;
  bool has_analytic_jacobian() const;
  const Variant& variant() const { return v_; }

  /// Unchecked drift; the integrator hot path.
  StateVector drift(const StateVector& s, double mu) const;
  /// Unchecked Jacobian, analytic when available.
  JacobianMatrix drift_jacobian(const StateVector& s, double mu) const;

 private:
  Variant v_;
};

/// Checked drift: dimension and finiteness of inputs are validated.
StateVector eval_rhs(const DynamicalSystem& system, const StateVector& state, double mu);
/// Checked Jacobian; throws NumericError on a non-finite result.
JacobianMatrix jacobian(const DynamicalSystem& system, const StateVector& state, double mu);
/// Central differences with step 1e-6 * max(1, |x_j|).
JacobianMatrix finite_difference_jacobian(const DynamicalSystem& system,
                                          const StateVector& state, double mu);

/// Coefficients ~ N(0,1), a random half zeroed, cubic terms made non-positive.
/// bif_param_index is set to the first nonzero coefficient.
PolynomialSystem2D sample_random_system(Rng& rng);

std::string to_json(const PolynomialSystem2D& system);
std::string to_json(const NamedModel& model);
PolynomialSystem2D polynomial_system_from_json(std::string_view text);
NamedModel named_model_from_json(std::string_view text);

}  // namespace tipcast
