// otalign/config.hpp

// Copyright 2026  OTAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OTALIGN_CONFIG_HPP_
#define OTALIGN_CONFIG_HPP_

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "otalign/datagen.hpp"
#include "otalign/error.hpp"
#include "otalign/pipeline.hpp"
#include "otalign/version.hpp"

namespace otalign {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

namespace detail {

// Typed field access that reports the full dotted path on failure.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string path)
      : j_(&j), path_(std::move(path)) {}

  bool has(const std::string& key) const { return j_->contains(key); }

  JsonReader sub(const std::string& key) const {
    if (!j_->contains(key) || !(*j_)[key].is_object()) {
      throw ConfigError(join(key) + ": expected an object");
    }
    return JsonReader((*j_)[key], join(key));
  }

  JsonReader sub_or_empty(const std::string& key) const {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j_->contains(key)) return JsonReader(empty, join(key));
    return sub(key);
  }

  template <class T>
  T require(const std::string& key) const {
    if (!j_->contains(key)) {
      throw ConfigError(join(key) + ": missing required field");
    }
    return get_checked<T>(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!j_->contains(key)) return fallback;
    return get_checked<T>(key);
  }

  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const nlohmann::json& raw() const { return *j_; }

 private:
  template <class T>
  T get_checked(const std::string& key) const {
    try {
      return (*j_)[key].get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(join(key) + ": has the wrong type");
    }
  }

  const nlohmann::json* j_;
  std::string path_;
};

}  // namespace detail

inline ShiftConfig shift_config_from_json(const nlohmann::json& j) {
  detail::JsonReader r(j, "");
  ShiftConfig cfg;
  cfg.num_classes_source =
      r.get<int>("num_classes_source", cfg.num_classes_source);
  cfg.num_classes_target =
      r.get<int>("num_classes_target", cfg.num_classes_target);
  cfg.dim = r.get<int>("dim", cfg.dim);
  cfg.samples_per_class =
      r.get<int>("samples_per_class", cfg.samples_per_class);
  cfg.class_separation =
      r.get<double>("class_separation", cfg.class_separation);
  cfg.within_class_std =
      r.get<double>("within_class_std", cfg.within_class_std);
  cfg.shift_rotation_angle =
      r.get<double>("shift_rotation_angle", cfg.shift_rotation_angle);
  cfg.shift_translation_norm =
      r.get<double>("shift_translation_norm", cfg.shift_translation_norm);
  cfg.shift_scale = r.get<double>("shift_scale", cfg.shift_scale);
  cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline nlohmann::ordered_json shift_config_to_json(const ShiftConfig& cfg) {
  nlohmann::ordered_json j;
  j["num_classes_source"] = cfg.num_classes_source;
  j["num_classes_target"] = cfg.num_classes_target;
  j["dim"] = cfg.dim;
  j["samples_per_class"] = cfg.samples_per_class;
  j["class_separation"] = cfg.class_separation;
  j["within_class_std"] = cfg.within_class_std;
  j["shift_rotation_angle"] = cfg.shift_rotation_angle;
  j["shift_translation_norm"] = cfg.shift_translation_norm;
  j["shift_scale"] = cfg.shift_scale;
  j["seed"] = cfg.seed;
  return j;
}

inline AlignConfig align_config_from_json(const detail::JsonReader& r) {
  AlignConfig cfg;
  cfg.alpha = r.get<double>("alpha", cfg.alpha);
  cfg.beta = r.get<double>("beta", cfg.beta);
  cfg.tau = r.get<double>("tau", cfg.tau);
  cfg.epsilon = r.get<double>("epsilon", cfg.epsilon);
  cfg.max_iter = r.get<int>("max_iter", cfg.max_iter);
  cfg.stop_tol = r.get<double>("stop_tol", cfg.stop_tol);
  if (r.has("weight_mode")) {
    cfg.weight_mode =
        weight_mode_from_name(r.require<std::string>("weight_mode"));
  }
  if (r.has("loss_eval")) {
    std::string ev = r.require<std::string>("loss_eval");
    if (ev == "weighted") {
      cfg.loss_eval = LossEval::kWeighted;
    } else if (ev == "unweighted") {
      cfg.loss_eval = LossEval::kUnweighted;
    } else {
      throw ConfigError(r.join("loss_eval") + ": expected 'weighted' or "
                        "'unweighted'");
    }
  }
  return cfg;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  detail::JsonReader r(j, "");
  TrainConfig cfg;
  if (r.has("method")) {
    cfg.method = method_from_name(r.require<std::string>("method"));
  }
  if (r.has("lambda_align")) {
    cfg.lambda_align = r.require<double>("lambda_align");
  }
  cfg.entropy_weight = r.get<double>("entropy_weight", cfg.entropy_weight);
  cfg.batch_size = r.get<int>("batch_size", cfg.batch_size);
  cfg.max_epochs = r.get<int>("max_epochs", cfg.max_epochs);
  cfg.patience = r.get<int>("patience", cfg.patience);
  cfg.val_fraction = r.get<double>("val_fraction", cfg.val_fraction);
  cfg.seed = r.get<std::uint64_t>("seed", cfg.seed);
  cfg.latent_dim = r.get<int>("latent_dim", cfg.latent_dim);
  cfg.align = align_config_from_json(r.sub_or_empty("align"));

  detail::JsonReader opt = r.sub_or_empty("optimizer");
  cfg.optimizer.learning_rate =
      opt.get<double>("learning_rate", cfg.optimizer.learning_rate);
  cfg.optimizer.beta1 = opt.get<double>("beta1", cfg.optimizer.beta1);
  cfg.optimizer.beta2 = opt.get<double>("beta2", cfg.optimizer.beta2);
  cfg.optimizer.epsilon = opt.get<double>("epsilon", cfg.optimizer.epsilon);

  detail::JsonReader critic = r.sub_or_empty("critic");
  cfg.critic.hidden_dim =
      critic.get<int>("hidden_dim", cfg.critic.hidden_dim);
  cfg.critic.steps = critic.get<int>("steps", cfg.critic.steps);
  cfg.critic.eta = critic.get<double>("eta", cfg.critic.eta);

  detail::JsonReader mmd = r.sub_or_empty("mmd");
  cfg.mmd.bandwidth = mmd.get<double>("bandwidth", cfg.mmd.bandwidth);

  detail::JsonReader cmd = r.sub_or_empty("cmd");
  cfg.cmd.order = cmd.get<int>("order", cfg.cmd.order);
  cfg.cmd.bound_min = cmd.get<double>("bound_min", cfg.cmd.bound_min);
  cfg.cmd.bound_max = cmd.get<double>("bound_max", cfg.cmd.bound_max);

  cfg.validate();
  return cfg;
}

inline nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["method"] = method_name(cfg.method);
  if (cfg.lambda_align.has_value()) {
    j["lambda_align"] = *cfg.lambda_align;
  }
  j["resolved_lambda"] = cfg.resolved_lambda();
  j["entropy_weight"] = cfg.entropy_weight;
  j["batch_size"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["val_fraction"] = cfg.val_fraction;
  j["seed"] = cfg.seed;
  j["latent_dim"] = cfg.latent_dim;
  j["align"] = {{"alpha", cfg.align.alpha},
                {"beta", cfg.align.beta},
                {"tau", cfg.align.tau},
                {"epsilon", cfg.align.epsilon},
                {"max_iter", cfg.align.max_iter},
                {"stop_tol", cfg.align.stop_tol},
                {"weight_mode", weight_mode_name(cfg.align.weight_mode)},
                {"loss_eval", cfg.align.loss_eval == LossEval::kWeighted
                                  ? "weighted"
                                  : "unweighted"}};
  j["optimizer"] = {{"learning_rate", cfg.optimizer.learning_rate},
                    {"beta1", cfg.optimizer.beta1},
                    {"beta2", cfg.optimizer.beta2},
                    {"epsilon", cfg.optimizer.epsilon}};
  j["critic"] = {{"hidden_dim", cfg.critic.hidden_dim},
                 {"steps", cfg.critic.steps},
                 {"eta", cfg.critic.eta}};
  j["mmd"] = {{"bandwidth", cfg.mmd.bandwidth}};
  j["cmd"] = {{"order", cfg.cmd.order},
              {"bound_min", cfg.cmd.bound_min},
              {"bound_max", cfg.cmd.bound_max}};
  return j;
}

inline nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["eer"] = m.eer;
  j["cavg"] = m.cavg_min;
  j["cavg_min"] = m.cavg_min;
  j["cavg_fixed"] = m.cavg_fixed;
  j["fixed_threshold"] = m.fixed_threshold;
  j["accuracy"] = m.accuracy;
  j["per_class_accuracy"] = m.per_class_accuracy;
  j["num_trials"] = m.num_trials;
  j["mean_target_entropy"] = m.mean_target_entropy;
  j["warnings"] = m.warnings;
  return j;
}

inline void write_json_file(const nlohmann::ordered_json& j,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

// Every command writes a manifest (resolved config copy, versions, seed)
// into its output directory; re-running a manifest reproduces the outputs
// byte for byte, so nothing time-dependent belongs here.
inline nlohmann::ordered_json make_manifest(
    const std::string& command, const nlohmann::ordered_json& config,
    std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["versions"] = {{"otalign", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"net_format", kNetFormat}};
  return j;
}

}  // namespace otalign

#endif  // OTALIGN_CONFIG_HPP_
