#include <hocp/problems.hpp>

#include <cmath>
#include <set>
#include <stdexcept>

namespace hocp {

namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

using Json = nlohmann::json;
using Vec2 = Eigen::Vector2d;

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw std::invalid_argument(std::string(what) + " config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw std::invalid_argument(std::string(what) + " config: unknown key '" + key + "'");
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw std::invalid_argument(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_vec(const Json& j, const char* key, Vec& out) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v);
  out = Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> as_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void TurboCarConfig::validate() const {
  check(T > 0, "TurboCarConfig: T must be positive");
  check(N >= 1, "TurboCarConfig: N must be >= 1");
  check(0 < v_minus && v_minus < v_plus && v_plus < v_max, "TurboCarConfig: need 0 < v_minus < v_plus < v_max");
  check(c_d >= 0, "TurboCarConfig: c_d must be nonnegative");
  check(a_max > 0 && b_max > 0, "TurboCarConfig: control bounds must be positive");
  check(x_target >= 0, "TurboCarConfig: x_target must be nonnegative");
  check(w0 == 0.0 || w0 == 1.0, "TurboCarConfig: w0 must be 0 or 1");
  check(weight_a >= 0 && weight_b >= 0, "TurboCarConfig: weights must be nonnegative");
  check(objective == "quadratic" || objective == "l1", "TurboCarConfig: objective must be 'quadratic' or 'l1'");
}

void FishingConfig::validate() const {
  check(T > 0, "FishingConfig: T must be positive");
  check(N >= 1, "FishingConfig: N must be >= 1");
  check(x_init.size() == 2 && x_ref.size() == 2, "FishingConfig: x_init and x_ref need 2 entries");
  check(c1.size() == 5 && c2.size() == 5, "FishingConfig: c1 and c2 need 5 entries");
  check(x_max > 0, "FishingConfig: x_max must be positive");
  check((x_init.array().abs() <= x_max).all(), "FishingConfig: x_init outside [-x_max, x_max]");
  check(tv_mode.value >= 0, "FishingConfig: TV parameter must be nonnegative");
}

OcpSpec build_turbo_car_spec(const TurboCarConfig& cfg) {
  cfg.validate();
  OcpSpec s;
  s.nx = 2;
  s.nu = 2;
  s.nw = 1;
  s.T = cfg.T;
  const double cd = cfg.c_d;
  s.dynamics = [cd](double, const Vec& x, const Vec& u, const Vec& w) {
    Vec f(2);
    f << x[1], (1.0 + 2.0 * w[0]) * u[0] - u[1] - cd * x[1] * x[1];
    return f;
  };
  s.dynamics_jacobian = [cd](double, const Vec& x, const Vec& u, const Vec& w) {
    DynamicsJacobian J;
    J.fx = Mat::Zero(2, 2);
    J.fu = Mat::Zero(2, 2);
    J.fw = Mat::Zero(2, 1);
    J.fx(0, 1) = 1.0;
    J.fx(1, 1) = -2.0 * cd * x[1];
    J.fu(1, 0) = 1.0 + 2.0 * w[0];
    J.fu(1, 1) = -1.0;
    J.fw(1, 0) = 2.0 * u[0];
    return J;
  };
  const double wa = cfg.weight_a, wb = cfg.weight_b;
  if (cfg.objective == "quadratic") {
    s.stage_cost = [wa, wb](double, const Vec&, const Vec& u, const Vec&) {
      return wa * u[0] * u[0] + wb * u[1] * u[1];
    };
    s.stage_cost_gradient = [wa, wb](double, const Vec&, const Vec& u, const Vec&) {
      return StageCostGradient{Vec::Zero(2), Vec2{2 * wa * u[0], 2 * wb * u[1]}, Vec::Zero(1)};
    };
  } else {
    s.stage_cost = [wa, wb](double, const Vec&, const Vec& u, const Vec&) { return wa * u[0] + wb * u[1]; };
    s.stage_cost_gradient = [wa, wb](double, const Vec&, const Vec&, const Vec&) {
      return StageCostGradient{Vec::Zero(2), Vec2{wa, wb}, Vec::Zero(1)};
    };
  }

  AffineDynamics pos;
  pos.ax = Vec2{0.0, 1.0};
  pos.au = Vec::Zero(2);
  pos.aw = Vec::Zero(1);
  s.affine = {pos, std::nullopt};

  s.x_init = Vec::Zero(2);
  s.terminal = {cfg.x_target, 0.0};
  s.x_lo = Vec2{0.0, -cfg.v_max};
  s.x_hi = Vec2{cfg.x_target, cfg.v_max};
  s.u_lo = Vec::Zero(2);
  s.u_hi = Vec2{cfg.a_max, cfg.b_max};
  s.w_prev_init = Vec::Constant(1, cfg.w0);

  const double vp = cfg.v_plus, vm = cfg.v_minus, vmax = cfg.v_max;
  auto row = [](double cv, double cw, double cwp, double hi) {
    StageRow r;
    r.cx = Vec2{0.0, cv};
    r.cu = Vec::Zero(2);
    r.cw = Vec::Constant(1, cw);
    r.cw_prev = Vec::Constant(1, cwp);
    r.hi = hi;
    return r;
  };
  s.stage_rows = {
      row(1.0, -(vmax - vp), 0.0, vp),                 // off => v <= v+
      row(-1.0, vm + vmax, 0.0, vmax),                 // on  => v >= v-
      row(-1.0, vp + vmax, -(vp + vmax), vmax),        // switch on  => v >= v+
      row(1.0, -(vmax - vm), vmax - vm, vmax),         // switch off => v <= v-
  };
  s.state_names = {"x", "v"};
  s.control_names = {"a", "b"};
  s.binary_names = {"w"};
  return s;
}

DiscretizedOcp build_turbo_car(const TurboCarConfig& cfg) {
  return discretize_euler(build_turbo_car_spec(cfg), cfg.N);
}

OcpSpec build_fishing_spec(const FishingConfig& cfg) {
  cfg.validate();
  OcpSpec s;
  s.nx = 2;
  s.nu = 0;
  s.nw = 5;
  s.T = cfg.T;
  const Vec c1 = cfg.c1, c2 = cfg.c2, xr = cfg.x_ref;
  s.dynamics = [c1, c2](double, const Vec& x, const Vec&, const Vec& w) {
    Vec f(2);
    f << x[0] - x[0] * x[1] - c1.dot(w), x[0] * x[1] - x[1] - c2.dot(w);
    return f;
  };
  s.dynamics_jacobian = [c1, c2](double, const Vec& x, const Vec&, const Vec&) {
    DynamicsJacobian J;
    J.fx.resize(2, 2);
    J.fx << 1.0 - x[1], -x[0], x[1], x[0] - 1.0;
    J.fu = Mat::Zero(2, 0);
    J.fw.resize(2, 5);
    J.fw.row(0) = -c1.transpose();
    J.fw.row(1) = -c2.transpose();
    return J;
  };
  s.stage_cost = [xr](double, const Vec& x, const Vec&, const Vec&) { return (x - xr).squaredNorm(); };
  s.stage_cost_gradient = [xr](double, const Vec& x, const Vec&, const Vec&) {
    return StageCostGradient{2.0 * (x - xr), Vec::Zero(0), Vec::Zero(5)};
  };
  s.x_init = cfg.x_init;
  s.x_lo = Vec::Constant(2, -cfg.x_max);
  s.x_hi = Vec::Constant(2, cfg.x_max);
  s.u_lo = Vec::Zero(0);
  s.u_hi = Vec::Zero(0);
  s.sos1 = true;
  s.state_names = {"x1", "x2"};
  s.binary_names = {"w1", "w2", "w3", "w4", "w5"};
  return s;
}

DiscretizedOcp build_fishing(const FishingConfig& cfg) {
  return add_total_variation(discretize_euler(build_fishing_spec(cfg), cfg.N), cfg.tv_mode);
}

void from_json(const Json& j, TurboCarConfig& c) {
  reject_unknown(j,
                 {"T", "N", "v_plus", "v_minus", "v_max", "c_d", "a_max", "b_max", "x_target", "w0", "weight_a",
                  "weight_b", "objective"},
                 "turbo_car");
  read(j, "T", c.T);
  read(j, "N", c.N);
  read(j, "v_plus", c.v_plus);
  read(j, "v_minus", c.v_minus);
  read(j, "v_max", c.v_max);
  read(j, "c_d", c.c_d);
  read(j, "a_max", c.a_max);
  read(j, "b_max", c.b_max);
  read(j, "x_target", c.x_target);
  read(j, "w0", c.w0);
  read(j, "weight_a", c.weight_a);
  read(j, "weight_b", c.weight_b);
  read(j, "objective", c.objective);
  c.validate();
}

void to_json(Json& j, const TurboCarConfig& c) {
  j = Json{{"T", c.T},           {"N", c.N},         {"v_plus", c.v_plus},     {"v_minus", c.v_minus},
           {"v_max", c.v_max},   {"c_d", c.c_d},     {"a_max", c.a_max},       {"b_max", c.b_max},
           {"x_target", c.x_target}, {"w0", c.w0},   {"weight_a", c.weight_a}, {"weight_b", c.weight_b},
           {"objective", c.objective}};
}

void from_json(const Json& j, FishingConfig& c) {
  reject_unknown(j, {"T", "N", "x_init", "x_ref", "c1", "c2", "x_max", "tv_mode"}, "fishing");
  read(j, "T", c.T);
  read(j, "N", c.N);
  read_vec(j, "x_init", c.x_init);
  read_vec(j, "x_ref", c.x_ref);
  read_vec(j, "c1", c.c1);
  read_vec(j, "c2", c.c2);
  read(j, "x_max", c.x_max);
  if (j.contains("tv_mode")) {
    const Json& t = j.at("tv_mode");
    reject_unknown(t, {"kind", "value"}, "tv_mode");
    std::string kind = "none";
    double value = 0.0;
    read(t, "kind", kind);
    read(t, "value", value);
    if (kind == "none") c.tv_mode = TvMode::none();
    else if (kind == "bound") c.tv_mode = TvMode::bound(value);
    else if (kind == "penalty") c.tv_mode = TvMode::penalty(value);
    else throw std::invalid_argument("tv_mode.kind must be none, bound or penalty");
  }
  c.validate();
}

void to_json(Json& j, const FishingConfig& c) {
  const char* kind = c.tv_mode.kind == TotalVariation::Kind::Bound     ? "bound"
                     : c.tv_mode.kind == TotalVariation::Kind::Penalty ? "penalty"
                                                                       : "none";
  j = Json{{"T", c.T},
           {"N", c.N},
           {"x_init", as_std(c.x_init)},
           {"x_ref", as_std(c.x_ref)},
           {"c1", as_std(c.c1)},
           {"c2", as_std(c.c2)},
           {"x_max", c.x_max},
           {"tv_mode", {{"kind", kind}, {"value", c.tv_mode.value}}}};
}

}  // namespace hocp
