#pragma once

#include <hocp/transcription.hpp>

#include <json.hpp>

#include <string>

namespace hocp {

struct TurboCarConfig {
  double T = 10.0;
  Index N = 100;
  double v_plus = 10.0;
  double v_minus = 5.0;
  double v_max = 25.0;
  double c_d = 1e-3;
  double a_max = 5.0;
  double b_max = 5.0;
  double x_target = 100.0;
  double w0 = 0.0;
  double weight_a = 1.0;
  double weight_b = 1.0;
  std::string objective = "quadratic";  // or "l1"

  void validate() const;
};

struct FishingConfig {
  double T = 12.0;
  Index N = 50;
  Vec x_init = Eigen::Vector2d(0.5, 0.7);
  Vec x_ref = Eigen::Vector2d(1.0, 1.0);
  Vec c1 = (Vec(5) << 0.0, 0.2, 0.4, 0.6, 0.8).finished();
  Vec c2 = (Vec(5) << 0.0, 0.1, 0.2, 0.3, 0.4).finished();
  double x_max = 10.0;  // state box [-x_max, x_max] for both species
  TvMode tv_mode;

  void validate() const;
};

OcpSpec build_turbo_car_spec(const TurboCarConfig& cfg);
DiscretizedOcp build_turbo_car(const TurboCarConfig& cfg);

OcpSpec build_fishing_spec(const FishingConfig& cfg);
DiscretizedOcp build_fishing(const FishingConfig& cfg);

// JSON mirrors of the configs. Unknown keys and wrong types throw
// std::invalid_argument.
void from_json(const nlohmann::json& j, TurboCarConfig& cfg);
void to_json(nlohmann::json& j, const TurboCarConfig& cfg);
void from_json(const nlohmann::json& j, FishingConfig& cfg);
void to_json(nlohmann::json& j, const FishingConfig& cfg);

}  // namespace hocp
