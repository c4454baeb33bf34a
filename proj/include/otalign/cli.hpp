// otalign/cli.hpp

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

#ifndef OTALIGN_CLI_HPP_
#define OTALIGN_CLI_HPP_

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "otalign/config.hpp"
#include "otalign/datagen.hpp"
#include "otalign/dataset.hpp"
#include "otalign/error.hpp"
#include "otalign/net_io.hpp"
#include "otalign/pipeline.hpp"
#include "otalign/version.hpp"

namespace otalign {
namespace cli {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string method;           // optional override
  std::optional<std::uint64_t> seed;  // optional override
  std::string grid;             // sweep-alpha only, comma separated
};

namespace detail {

inline int max_threads_from_env() {
  const char* env = std::getenv("OTALIGN_THREADS");
  if (env != nullptr) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline void apply_overrides(TrainConfig& cfg, const CommonArgs& args) {
  if (!args.method.empty()) cfg.method = method_from_name(args.method);
  if (args.seed.has_value()) cfg.seed = *args.seed;
}

inline std::filesystem::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out: output directory is required");
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

struct TrainInputs {
  Dataset source;
  std::optional<Dataset> target;
  std::optional<Dataset> target_eval;
  nlohmann::ordered_json data_manifest;
};

inline TrainInputs load_train_inputs(const nlohmann::json& j,
                                     bool need_target,
                                     bool need_target_eval) {
  otalign::detail::JsonReader r(j, "");
  otalign::detail::JsonReader data = r.sub("data");
  TrainInputs in;
  std::string source_path = data.require<std::string>("source");
  in.source = load_features(source_path, Domain::kSource);
  if (!in.source.fully_labeled()) {
    throw InputError("data.source: '" + source_path +
                     "' must be fully labeled for the source role");
  }
  in.data_manifest["source"] = source_path;
  if (data.has("target") || need_target) {
    std::string target_path = data.require<std::string>("target");
    in.target = load_features(target_path, Domain::kTarget);
    in.data_manifest["target"] = target_path;
    if (in.target->dim() != in.source.dim()) {
      throw InputError("data.target: feature dimension " +
                       std::to_string(in.target->dim()) +
                       " does not match the source (" +
                       std::to_string(in.source.dim()) + ")");
    }
  }
  if (data.has("target_eval") || need_target_eval) {
    std::string eval_path = data.require<std::string>("target_eval");
    in.target_eval = load_features(eval_path, Domain::kTarget);
    in.data_manifest["target_eval"] = eval_path;
    if (!in.target_eval->fully_labeled()) {
      throw InputError("data.target_eval: '" + eval_path +
                       "' must be fully labeled");
    }
  }
  return in;
}

inline int num_classes_for(const nlohmann::json& j, const Dataset& source) {
  otalign::detail::JsonReader r(j, "");
  int max_label =
      *std::max_element(source.labels.begin(), source.labels.end());
  int n = r.get<int>("num_classes", max_label + 1);
  if (n < max_label + 1) {
    throw ConfigError("num_classes: smaller than the largest source label");
  }
  return n;
}

inline AdaptationNetwork make_or_load_net(const nlohmann::json& j,
                                          const TrainConfig& cfg,
                                          const Dataset& source,
                                          const std::filesystem::path& out,
                                          nlohmann::ordered_json* manifest) {
  otalign::detail::JsonReader r(j, "");
  if (r.has("init_net")) {
    std::string path = r.require<std::string>("init_net");
    (*manifest)["init_net"] = path;
    return load_network(path);
  }
  Rng rng = Rng(cfg.seed).fork("net/init");
  AdaptationNetwork net(source.dim(), cfg.latent_dim,
                        num_classes_for(j, source), rng);
  RunHistory pre = pretrain_source(net, source, cfg);
  write_history_csv(pre, (out / "pretrain_history.csv").string());
  (*manifest)["pretrained_in_run"] = true;
  return net;
}

inline std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("--grid: non-numeric entry '" + item + "'");
    }
  }
  if (grid.empty()) throw ConfigError("--grid: empty grid");
  return grid;
}

// The label-weight grid mirrored by the default sweep.
inline std::vector<double> default_alpha_grid() {
  return {0.0, 1e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1};
}

}  // namespace detail

inline int cmd_generate(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  ShiftConfig cfg = shift_config_from_json(j);
  if (args.seed.has_value()) cfg.seed = *args.seed;
  auto out = detail::prepare_out_dir(args.out_dir);
  ShiftBenchmark bench = generate_shift_benchmark(cfg);
  save_features(bench.source, (out / "source.csv").string());
  save_features(bench.target_unlabeled,
                (out / "target_unlabeled.csv").string());
  save_features(bench.target_eval, (out / "target_eval.csv").string());
  write_json_file(
      make_manifest("generate", shift_config_to_json(cfg), cfg.seed),
      (out / "manifest.json").string());
  std::cout << "generate: wrote " << bench.source.num_samples()
            << " source and " << bench.target_eval.num_samples()
            << " target samples to " << out.string() << "\n";
  return 0;
}

inline int cmd_pretrain(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  TrainConfig cfg = train_config_from_json(j);
  detail::apply_overrides(cfg, args);
  auto out = detail::prepare_out_dir(args.out_dir);
  detail::TrainInputs in = detail::load_train_inputs(j, false, false);

  Rng rng = Rng(cfg.seed).fork("net/init");
  AdaptationNetwork net(in.source.dim(), cfg.latent_dim,
                        detail::num_classes_for(j, in.source), rng);
  RunHistory hist = pretrain_source(net, in.source, cfg);
  save_network(net, (out / "net.json").string());
  write_history_csv(hist, (out / "history.csv").string());

  nlohmann::ordered_json manifest_cfg = train_config_to_json(cfg);
  manifest_cfg["data"] = in.data_manifest;
  write_json_file(make_manifest("pretrain", manifest_cfg, cfg.seed),
                  (out / "manifest.json").string());
  std::cout << "pretrain: " << hist.num_epochs() << " epochs, best epoch "
            << hist.best_epoch << "\n";
  return 0;
}

inline int cmd_adapt(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  TrainConfig cfg = train_config_from_json(j);
  detail::apply_overrides(cfg, args);
  auto out = detail::prepare_out_dir(args.out_dir);
  detail::TrainInputs in = detail::load_train_inputs(j, true, true);

  nlohmann::ordered_json manifest_cfg = train_config_to_json(cfg);
  manifest_cfg["data"] = in.data_manifest;
  AdaptationNetwork net =
      detail::make_or_load_net(j, cfg, in.source, out, &manifest_cfg);

  RunHistory hist = adapt(net, in.source, *in.target, cfg);
  MetricsReport metrics = evaluate(net, *in.target_eval);

  save_network(net, (out / "net.json").string());
  write_history_csv(hist, (out / "history.csv").string());
  write_json_file(metrics_to_json(metrics), (out / "metrics.json").string());
  write_json_file(make_manifest("adapt", manifest_cfg, cfg.seed),
                  (out / "manifest.json").string());
  std::cout << "adapt(" << method_name(cfg.method) << "): "
            << hist.num_epochs() << " epochs, accuracy "
            << metrics.accuracy << ", eer " << metrics.eer << "\n";
  return 0;
}

inline int cmd_evaluate(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  otalign::detail::JsonReader r(j, "");
  auto out = detail::prepare_out_dir(args.out_dir);
  std::string net_path = r.require<std::string>("net");
  AdaptationNetwork net = load_network(net_path);
  otalign::detail::JsonReader data = r.sub("data");
  std::string eval_path = data.require<std::string>("eval");
  Dataset eval = load_features(eval_path, Domain::kTarget);
  double threshold = r.get<double>("fixed_threshold", 0.5);

  MetricsReport metrics = evaluate(net, eval, threshold);
  write_json_file(metrics_to_json(metrics), (out / "metrics.json").string());

  // Operating points for external DET plotting.
  ForwardCache cache = net.forward(eval.features);
  TrialSet trials{cache.probs, eval.labels};
  std::ofstream det((out / "det.csv").string(), std::ios::binary);
  if (!det) throw IoError("cannot open det.csv for writing");
  det << "threshold,far,frr\n";
  for (const DetPoint& p : det_curve(trials)) {
    det << otalign::detail::format_double(p.threshold) << ","
        << otalign::detail::format_double(p.far) << ","
        << otalign::detail::format_double(p.frr) << "\n";
  }

  nlohmann::ordered_json manifest_cfg;
  manifest_cfg["net"] = net_path;
  manifest_cfg["data"] = {{"eval", eval_path}};
  manifest_cfg["fixed_threshold"] = threshold;
  std::uint64_t seed = args.seed.value_or(0);
  write_json_file(make_manifest("evaluate", manifest_cfg, seed),
                  (out / "manifest.json").string());
  std::cout << "evaluate: eer " << metrics.eer << ", cavg "
            << metrics.cavg_min << ", accuracy " << metrics.accuracy
            << "\n";
  return 0;
}

inline int cmd_sweep_alpha(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  TrainConfig cfg = train_config_from_json(j);
  detail::apply_overrides(cfg, args);
  auto out = detail::prepare_out_dir(args.out_dir);
  detail::TrainInputs in = detail::load_train_inputs(j, true, true);

  std::vector<double> grid;
  if (!args.grid.empty()) {
    grid = detail::parse_grid(args.grid);
  } else if (j.contains("alpha_grid")) {
    grid = otalign::detail::JsonReader(j, "")
               .require<std::vector<double>>("alpha_grid");
    if (grid.empty()) throw ConfigError("alpha_grid: empty grid");
  } else {
    grid = detail::default_alpha_grid();
  }

  nlohmann::ordered_json manifest_cfg = train_config_to_json(cfg);
  manifest_cfg["data"] = in.data_manifest;
  manifest_cfg["alpha_grid"] = grid;
  AdaptationNetwork net =
      detail::make_or_load_net(j, cfg, in.source, out, &manifest_cfg);

  std::vector<SweepRow> rows =
      alpha_sweep(cfg, grid, net, in.source, *in.target, *in.target_eval,
                  detail::max_threads_from_env());
  write_sweep_csv(rows, (out / "sweep.csv").string());
  write_json_file(make_manifest("sweep-alpha", manifest_cfg, cfg.seed),
                  (out / "manifest.json").string());
  std::cout << "sweep-alpha: " << rows.size() << " grid points written\n";
  return 0;
}

inline int cmd_export(const CommonArgs& args) {
  nlohmann::json j = load_json_file(args.config_path);
  TrainConfig cfg = train_config_from_json(j);
  detail::apply_overrides(cfg, args);
  auto out = detail::prepare_out_dir(args.out_dir);
  otalign::detail::JsonReader r(j, "");
  std::string net_path = r.require<std::string>("net");
  AdaptationNetwork net = load_network(net_path);
  detail::TrainInputs in = detail::load_train_inputs(j, true, false);

  write_coupling_csv(coupling_snapshot(net, in.source, *in.target, cfg),
                     (out / "coupling.csv").string());
  const Dataset& embed_target =
      in.target_eval.has_value() ? *in.target_eval : *in.target;
  write_embeddings_csv(net, in.source, embed_target,
                       (out / "embeddings.csv").string());
  if (r.has("history_csv")) {
    std::filesystem::copy_file(
        r.require<std::string>("history_csv"), out / "history.csv",
        std::filesystem::copy_options::overwrite_existing);
  }

  nlohmann::ordered_json manifest_cfg = train_config_to_json(cfg);
  manifest_cfg["net"] = net_path;
  manifest_cfg["data"] = in.data_manifest;
  write_json_file(make_manifest("export", manifest_cfg, cfg.seed),
                  (out / "manifest.json").string());
  std::cout << "export: wrote coupling.csv and embeddings.csv\n";
  return 0;
}

// Entry point shared by the binary and the tests. `args` excludes argv[0].
inline int run(const std::vector<std::string>& args) {
  CLI::App app{"Domain alignment via coupling-weighted partial optimal "
               "transport, with discrepancy and adversarial baselines"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs parsed[6];
  const char* names[6] = {"generate", "pretrain", "adapt",
                          "evaluate", "sweep-alpha", "export"};
  const char* descriptions[6] = {
      "Generate the synthetic domain-shift benchmark CSVs",
      "Train the classifier on labeled source features",
      "Adapt a model to an unlabeled target domain",
      "Score a saved model on a labeled evaluation set",
      "Re-run adaptation over a grid of label-cost weights",
      "Export coupling and embedding CSVs for a saved model"};
  CLI::App* subs[6];
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], descriptions[k]);
    sub->add_option("--config", parsed[k].config_path,
                    "JSON configuration file")
        ->required();
    sub->add_option("--out", parsed[k].out_dir, "output directory")
        ->required();
    sub->add_option("--method", parsed[k].method,
                    "override the adaptation method");
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [k, &parsed](std::uint64_t v) { parsed[k].seed = v; },
        "override the config seed");
    if (std::string(names[k]) == "sweep-alpha") {
      sub->add_option("--grid", parsed[k].grid,
                      "comma-separated alpha grid");
    }
    subs[k] = sub;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (subs[0]->parsed()) return cmd_generate(parsed[0]);
    if (subs[1]->parsed()) return cmd_pretrain(parsed[1]);
    if (subs[2]->parsed()) return cmd_adapt(parsed[2]);
    if (subs[3]->parsed()) return cmd_evaluate(parsed[3]);
    if (subs[4]->parsed()) return cmd_sweep_alpha(parsed[4]);
    if (subs[5]->parsed()) return cmd_export(parsed[5]);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

}  // namespace cli
}  // namespace otalign

#endif  // OTALIGN_CLI_HPP_
