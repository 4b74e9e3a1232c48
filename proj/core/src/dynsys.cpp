#include "tipcast/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <numeric>
#include <random>
#include <sstream>

#include "tipcast/errors.hpp"

namespace tipcast {

namespace {

using json = nlohmann::json;

struct ModelTable {
  ModelId id;
  std::string_view name;
  int dim;
  std::string_view bif;
  // Symbols in packing order, with defaults.
  std::vector<std::pair<std::string, double>> symbols;
};

const std::vector<ModelTable>& model_tables() {
  static const std::vector<ModelTable> tables = {
      {ModelId::may_fold, "may_fold", 1, "h", {{"r", 1.0}, {"k", 1.0}, {"s", 0.1}, {"h", 0.0}}},
      {ModelId::food_chain_hopf,
       "food_chain_hopf",
       3,
       "k",
       {{"k", 0.2},
        {"x_c", 0.4},
        {"y_c", 2.009},
        {"x_p", 0.08},
        {"y_p", 2.876},
        {"r_0", 0.16129},
        {"c_0", 0.5}}},
      {ModelId::rosenzweig_transcritical,
       "rosenzweig_transcritical",
       2,
       "a",
       {{"g", 4.0}, {"k", 1.7}, {"a", 0.0}, {"e", 0.5}, {"h", 0.15}, {"m", 2.0}}},
      {ModelId::energy_balance_fold,
       "energy_balance_fold",
       1,
       "u",
       {{"e", 0.69},
        {"rho", 0.003},
        {"I_0", 71944000.0},
        {"c", 1e8},
        {"a", 2.8},
        {"b", 0.009},
        {"u", 1.4}}},
      {ModelId::pleistocene_hopf,
       "pleistocene_hopf",
       3,
       "u",
       {{"p", 1.0}, {"q", 1.2}, {"s", 0.8}, {"u", 0.0}}},
      {ModelId::triffid_transcritical,
       "triffid_transcritical",
       1,
       "P",
       {{"P", 0.9}, {"G", 0.004}, {"V_floor", 0.1}}},
      {ModelId::sleep_wake_hysteresis,
       "sleep_wake_hysteresis",
       2,
       "D",
       {{"tau_v", 10.0},
        {"tau_m", 10.0},
        {"v_vm", -1.9},
        {"v_ma", 1.0},
        {"Q_a", 1.0},
        {"v_mv", -1.9},
        {"Q_max", 100.0},
        {"theta", 10.0},
        {"sigma", 3.0},
        {"D", 0.1}}},
      {ModelId::sprott_b_hysteresis,
       "sprott_b_hysteresis",
       3,
       "k",
       {{"a", 8.0}, {"b", 2.89}, {"beta", 5.0}, {"k", 3.141592653589793}}},
  };
  return tables;
}

const ModelTable& table_for(ModelId id) {
  for (const auto& t : model_tables()) {
    if (t.id == id) return t;
  }
  throw ArgumentError("unknown model id");
}

void require_denominator(double d) {
  if (!(std::abs(d) >= 1e-12)) throw NumericError("denominator below 1e-12 in model drift");
}

bool all_finite(const StateVector& s) { return s.array().isFinite().all(); }

// Monomials (1, x, y, x^2, xy, y^2, x^3, x^2y, xy^2, y^3) and their gradients.
std::array<double, 10> monomials(double x, double y) {
  return {1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
}
std::array<double, 10> monomials_dx(double x, double y) {
  return {0.0, 1.0, 0.0, 2 * x, y, 0.0, 3 * x * x, 2 * x * y, y * y, 0.0};
}
std::array<double, 10> monomials_dy(double x, double y) {
  return {0.0, 0.0, 1.0, 0.0, x, 2 * y, 0.0, x * x, 2 * x * y, 3 * y * y};
}

}  // namespace

StateVector make_state(std::initializer_list<double> values) {
  if (values.size() == 0 || values.size() > static_cast<std::size_t>(kMaxStateDim)) {
    throw ArgumentError("state dimension must be 1..3");
  }
  StateVector s(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s(i++) = v;
  return s;
}

// ---------------------------------------------------------------- polynomial

double PolynomialSystem2D::coefficient(int index) const {
  if (index < 0 || index >= kCoefficients) throw ArgumentError("coefficient index out of range");
  return index < kTerms ? a[index] : b[index - kTerms];
}

void PolynomialSystem2D::set_coefficient(int index, double value) {
  if (index < 0 || index >= kCoefficients) throw ArgumentError("coefficient index out of range");
  (index < kTerms ? a[index] : b[index - kTerms]) = value;
}

PolynomialSystem2D PolynomialSystem2D::with_bif_param(int index) const {
  if (coefficient(index) == 0.0) throw ArgumentError("bifurcation coefficient must be nonzero");
  PolynomialSystem2D out = *this;
  out.bif_param_index = index;
  return out;
}

std::vector<int> PolynomialSystem2D::nonzero_indices() const {
  std::vector<int> out;
  for (int i = 0; i < kCoefficients; ++i) {
    if (coefficient(i) != 0.0) out.push_back(i);
  }
  return out;
}

bool PolynomialSystem2D::is_cubic_index(int index) { return (index % kTerms) >= 6; }

void PolynomialSystem2D::validate() const {
  int zeros = 0;
  for (int i = 0; i < kCoefficients; ++i) {
    const double c = coefficient(i);
    if (!std::isfinite(c)) throw ArgumentError("non-finite coefficient");
    if (c == 0.0) ++zeros;
    if (is_cubic_index(i) && c > 0.0) throw ArgumentError("cubic coefficients must be <= 0");
  }
  if (zeros != kCoefficients / 2) throw ArgumentError("exactly 10 coefficients must be zero");
  if (bif_param_index < 0 || bif_param_index >= kCoefficients ||
      coefficient(bif_param_index) == 0.0) {
    throw ArgumentError("bif_param_index must refer to a nonzero coefficient");
  }
}

StateVector PolynomialSystem2D::rhs(const StateVector& s, double mu) const {
  const auto m = monomials(s(0), s(1));
  double fx = 0.0;
  double fy = 0.0;
  for (int i = 0; i < kTerms; ++i) {
    fx += (i == bif_param_index ? mu : a[i]) * m[i];
    fy += (i + kTerms == bif_param_index ? mu : b[i]) * m[i];
  }
  StateVector out(2);
  out << fx, fy;
  return out;
}

JacobianMatrix PolynomialSystem2D::analytic_jacobian(const StateVector& s, double mu) const {
  const auto mx = monomials_dx(s(0), s(1));
  const auto my = monomials_dy(s(0), s(1));
  JacobianMatrix j = JacobianMatrix::Zero(2, 2);
  for (int i = 0; i < kTerms; ++i) {
    const double ai = i == bif_param_index ? mu : a[i];
    const double bi = i + kTerms == bif_param_index ? mu : b[i];
    j(0, 0) += ai * mx[i];
    j(0, 1) += ai * my[i];
    j(1, 0) += bi * mx[i];
    j(1, 1) += bi * my[i];
  }
  return j;
}

// ---------------------------------------------------------------- named

std::string_view to_string(ModelId id) { return table_for(id).name; }

ModelId model_id_from_string(std::string_view name) {
  for (const auto& t : model_tables()) {
    if (t.name == name) return t.id;
  }
  throw ArgumentError("unknown model id: " + std::string(name));
}

const std::vector<ModelId>& all_model_ids() {
  static const std::vector<ModelId> ids = [] {
    std::vector<ModelId> v;
    for (const auto& t : model_tables()) v.push_back(t.id);
    return v;
  }();
  return ids;
}

NamedModel::NamedModel(ModelId id) : NamedModel(id, {}) {}

NamedModel::NamedModel(ModelId id, const std::map<std::string, double>& overrides) : id_(id) {
  const auto& t = table_for(id);
  for (const auto& [k, v] : t.symbols) params_[k] = v;
  for (const auto& [k, v] : overrides) {
    auto it = params_.find(k);
    if (it == params_.end()) {
      throw ArgumentError("model " + std::string(t.name) + " has no parameter " + k);
    }
    if (!std::isfinite(v)) throw ArgumentError("parameter " + k + " must be finite");
    it->second = v;
  }
  pack();
}

void NamedModel::pack() {
  const auto& t = table_for(id_);
  for (std::size_t i = 0; i < t.symbols.size(); ++i) packed_[i] = params_.at(t.symbols[i].first);
}

int NamedModel::state_dim() const { return table_for(id_).dim; }

std::string_view NamedModel::bif_param_name() const { return table_for(id_).bif; }

double NamedModel::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter " + name);
  return it->second;
}

StateVector NamedModel::rhs(const StateVector& s, double mu) const {
  const auto& p = packed_;
  StateVector out(state_dim());
  switch (id_) {
    case ModelId::may_fold: {
      const double r = p[0], k = p[1], sh = p[2], h = mu;
      const double x = s(0);
      const double den = sh * sh + x * x;
      require_denominator(den);
      out(0) = r * x * (1.0 - x / k) - h * x * x / den;
      break;
    }
    case ModelId::food_chain_hopf: {
      const double k = mu, xc = p[1], yc = p[2], xp = p[3], yp = p[4], r0 = p[5], c0 = p[6];
      const double r = s(0), c = s(1), q = s(2);
      require_denominator(k);
      require_denominator(r + r0);
      require_denominator(c + c0);
      out(0) = r * (1.0 - r / k) - xc * yc * c * r / (r + r0);
      out(1) = xc * c * (yc * r / (r + r0) - 1.0) - xp * yp * q * c / (c + c0);
      out(2) = xp * q * (yp * c / (c + c0) - 1.0);
      break;
    }
    case ModelId::rosenzweig_transcritical: {
      const double g = p[0], k = p[1], a = mu, e = p[3], h = p[4], m = p[5];
      const double x = s(0), y = s(1);
      const double den = 1.0 + a * h * x;
      require_denominator(den);
      out(0) = g * x * (1.0 - x / k) - a * x * y / den;
      out(1) = e * a * x * y / den - m * y;
      break;
    }
    case ModelId::energy_balance_fold: {
      const double e = p[0], rho = p[1], i0 = p[2], c = p[3], a = p[4], b = p[5], u = mu;
      const double t = s(0);
      const double ap = a - b * t;
      out(0) = (-e * rho * t * t * t * t + 0.25 * u * i0 * (1.0 - ap)) / c;
      break;
    }
    case ModelId::pleistocene_hopf: {
      const double pp = p[0], q = p[1], sp = p[2], u = mu;
      const double x = s(0), y = s(1), z = s(2);
      out(0) = -x - y;
      out(1) = -pp * z + u * y + sp * z * z - y * z * z;
      out(2) = -q * (x + z);
      break;
    }
    case ModelId::triffid_transcritical: {
      const double pp = mu, g = p[1], floor = p[2];
      const double v = s(0);
      const double vs = v < floor ? floor : v;
      out(0) = pp * vs * (1.0 - v) - g * v;
      break;
    }
    case ModelId::sleep_wake_hysteresis: {
      const double tau_v = p[0], tau_m = p[1], v_vm = p[2], v_ma = p[3], q_a = p[4],
                   v_mv = p[5], q_max = p[6], theta = p[7], sg = p[8], d = mu;
      const double vv = s(0), vm = s(1);
      require_denominator(sg);
      require_denominator(tau_v);
      require_denominator(tau_m);
      const auto q = [&](double v) { return q_max / (1.0 + std::exp(-(v - theta) / sg)); };
      out(0) = (-vv + v_vm * q(vm) + d) / tau_v;
      out(1) = (-vm + v_ma * q_a + v_mv * q(vv)) / tau_m;
      break;
    }
    case ModelId::sprott_b_hysteresis: {
      const double a = p[0], b = p[1], beta = p[2], k = mu;
      const double x = s(0), y = s(1), z = s(2);
      out(0) = a * (y - x);
      out(1) = x * z + beta * std::cos(k);
      out(2) = b - x * y;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- normal forms

int NormalForm::state_dim() const {
  return (kind == NormalFormKind::hopf_supercritical || kind == NormalFormKind::hopf_subcritical)
             ? 2
             : 1;
}

StateVector NormalForm::rhs(const StateVector& s, double mu) const {
  StateVector out(state_dim());
  switch (kind) {
    case NormalFormKind::fold:
      out(0) = mu + s(0) * s(0);
      break;
    case NormalFormKind::transcritical:
      out(0) = mu * s(0) - s(0) * s(0);
      break;
    case NormalFormKind::hopf_supercritical:
    case NormalFormKind::hopf_subcritical: {
      const double sign = kind == NormalFormKind::hopf_supercritical ? -1.0 : 1.0;
      const double x = s(0), y = s(1);
      const double r2 = x * x + y * y;
      out(0) = mu * x - y + sign * x * r2;
      out(1) = x + mu * y + sign * y * r2;
      break;
    }
  }
  return out;
}

JacobianMatrix NormalForm::analytic_jacobian(const StateVector& s, double mu) const {
  JacobianMatrix j(state_dim(), state_dim());
  switch (kind) {
    case NormalFormKind::fold:
      j(0, 0) = 2.0 * s(0);
      break;
    case NormalFormKind::transcritical:
      j(0, 0) = mu - 2.0 * s(0);
      break;
    case NormalFormKind::hopf_supercritical:
    case NormalFormKind::hopf_subcritical: {
      const double sign = kind == NormalFormKind::hopf_supercritical ? -1.0 : 1.0;
      const double x = s(0), y = s(1);
      j(0, 0) = mu + sign * (3 * x * x + y * y);
      j(0, 1) = -1.0 + sign * 2 * x * y;
      j(1, 0) = 1.0 + sign * 2 * x * y;
      j(1, 1) = mu + sign * (x * x + 3 * y * y);
      break;
    }
  }
  return j;
}

// ---------------------------------------------------------------- wrapper

DynamicalSystem::DynamicalSystem(CustomSystem s) : v_(std::move(s)) {
  const auto& c = std::get<CustomSystem>(v_);
  if (c.dim < 1 || c.dim > kMaxStateDim) throw ArgumentError("custom system dimension must be 1..3");
  if (!c.rhs) throw ArgumentError("custom system needs a drift callable");
}

int DynamicalSystem::state_dim() const {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PolynomialSystem2D>) {
          return 2;
        } else if constexpr (std::is_same_v<T, CustomSystem>) {
          return s.dim;
        } else {
          return s.state_dim();
        }
      },
      v_);
}

std::string DynamicalSystem::name() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PolynomialSystem2D>) {
          return "polynomial2d";
        } else if constexpr (std::is_same_v<T, NamedModel>) {
          return std::string(to_string(s.id()));
        } else if constexpr (std::is_same_v<T, NormalForm>) {
          switch (s.kind) {
            case NormalFormKind::fold: return "normal_fold";
            case NormalFormKind::hopf_supercritical: return "normal_hopf_super";
            case NormalFormKind::hopf_subcritical: return "normal_hopf_sub";
            case NormalFormKind::transcritical: return "normal_transcritical";
          }
          return "normal";
        } else {
          return s.name;
        }
      },
      v_);
}

bool DynamicalSystem::has_analytic_jacobian() const {
  if (std::holds_alternative<PolynomialSystem2D>(v_) || std::holds_alternative<NormalForm>(v_)) {
    return true;
  }
  if (const auto* c = std::get_if<CustomSystem>(&v_)) return static_cast<bool>(c->jacobian);
  return false;
}

StateVector DynamicalSystem::drift(const StateVector& s, double mu) const {
  return std::visit([&](const auto& sys) -> StateVector { return sys.rhs(s, mu); }, v_);
}

JacobianMatrix DynamicalSystem::drift_jacobian(const StateVector& s, double mu) const {
  if (const auto* p = std::get_if<PolynomialSystem2D>(&v_)) return p->analytic_jacobian(s, mu);
  if (const auto* n = std::get_if<NormalForm>(&v_)) return n->analytic_jacobian(s, mu);
  if (const auto* c = std::get_if<CustomSystem>(&v_); c != nullptr && c->jacobian) {
    return c->jacobian(s, mu);
  }
  return finite_difference_jacobian(*this, s, mu);
}

namespace {
void check_inputs(const DynamicalSystem& system, const StateVector& state, double mu) {
  if (state.size() != system.state_dim()) {
    throw ArgumentError("state dimension " + std::to_string(state.size()) +
                        " does not match system dimension " +
                        std::to_string(system.state_dim()));
  }
  if (!all_finite(state)) throw ArgumentError("state has non-finite components");
  if (!std::isfinite(mu)) throw ArgumentError("mu must be finite");
}
}  // namespace

StateVector eval_rhs(const DynamicalSystem& system, const StateVector& state, double mu) {
  check_inputs(system, state, mu);
  StateVector out = system.drift(state, mu);
  if (!all_finite(out)) throw NumericError("drift evaluated to a non-finite value");
  return out;
}

JacobianMatrix finite_difference_jacobian(const DynamicalSystem& system, const StateVector& state,
                                          double mu) {
  const int n = static_cast<int>(state.size());
  JacobianMatrix j(n, n);
  StateVector xp = state;
  StateVector xm = state;
  for (int c = 0; c < n; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(state(c)));
    xp(c) = state(c) + h;
    xm(c) = state(c) - h;
    j.col(c) = (system.drift(xp, mu) - system.drift(xm, mu)) / (xp(c) - xm(c));
    xp(c) = state(c);
    xm(c) = state(c);
  }
  return j;
}

JacobianMatrix jacobian(const DynamicalSystem& system, const StateVector& state, double mu) {
  check_inputs(system, state, mu);
  JacobianMatrix j = system.drift_jacobian(state, mu);
  if (!j.array().isFinite().all()) throw NumericError("Jacobian has non-finite entries");
  return j;
}

PolynomialSystem2D sample_random_system(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PolynomialSystem2D s;
  for (int i = 0; i < PolynomialSystem2D::kCoefficients; ++i) {
    double v = normal(rng);
    // P(v == 0) is zero; keep the zero count exact anyway.
    if (v == 0.0) v = 1e-300;
    s.set_coefficient(i, PolynomialSystem2D::is_cubic_index(i) ? -std::abs(v) : v);
  }
  std::array<int, PolynomialSystem2D::kCoefficients> order{};
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < PolynomialSystem2D::kCoefficients / 2; ++i) s.set_coefficient(order[i], 0.0);
  s.bif_param_index = s.nonzero_indices().front();
  return s;
}

// ---------------------------------------------------------------- json

std::string to_json(const PolynomialSystem2D& system) {
  json j;
  j["a"] = system.a;
  j["b"] = system.b;
  j["bif_param_index"] = system.bif_param_index;
  return j.dump();
}

std::string to_json(const NamedModel& model) {
  json j;
  j["model_id"] = std::string(to_string(model.id()));
  j["params"] = model.params();
  return j.dump();
}

PolynomialSystem2D polynomial_system_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    PolynomialSystem2D s;
    const auto a = j.at("a").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (a.size() != 10 || b.size() != 10) throw ArgumentError("a and b must have 10 entries");
    std::copy(a.begin(), a.end(), s.a.begin());
    std::copy(b.begin(), b.end(), s.b.begin());
    s.bif_param_index = j.at("bif_param_index").get<int>();
    if (s.bif_param_index < 0 || s.bif_param_index >= PolynomialSystem2D::kCoefficients) {
      throw ArgumentError("bif_param_index out of range");
    }
    return s;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("invalid polynomial system JSON: ") + e.what());
  }
}

NamedModel named_model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const ModelId id = model_id_from_string(j.at("model_id").get<std::string>());
    std::map<std::string, double> params;
    if (j.contains("params")) params = j.at("params").get<std::map<std::string, double>>();
    return NamedModel(id, params);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("invalid named model JSON: ") + e.what());
  }
}

}  // namespace tipcast
