// otalign/net_io.hpp

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

#ifndef OTALIGN_NET_IO_HPP_
#define OTALIGN_NET_IO_HPP_

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "otalign/error.hpp"
#include "otalign/nn.hpp"
#include "otalign/version.hpp"

namespace otalign {

namespace detail {

inline nlohmann::ordered_json dense_layer_to_json(const DenseLayer& layer) {
  nlohmann::ordered_json j;
  j["in_dim"] = layer.in_dim();
  j["out_dim"] = layer.out_dim();
  j["activation"] = activation_name(layer.activation);
  // row-major weight entries
  std::vector<double> w;
  w.reserve(layer.weights.size());
  for (int i = 0; i < layer.weights.rows(); ++i) {
    for (int jj = 0; jj < layer.weights.cols(); ++jj) {
      w.push_back(layer.weights(i, jj));
    }
  }
  j["weights"] = w;
  j["bias"] = std::vector<double>(layer.bias.data(),
                                  layer.bias.data() + layer.bias.size());
  return j;
}

inline DenseLayer dense_layer_from_json(const nlohmann::json& j,
                                        const std::string& path) {
  DenseLayer layer;
  int in = j.at("in_dim").get<int>();
  int out = j.at("out_dim").get<int>();
  if (in < 1 || out < 1) {
    throw ParseError(path + ": dense layer dimensions must be >= 1");
  }
  layer.activation = activation_from_name(j.at("activation").get<std::string>());
  auto w = j.at("weights").get<std::vector<double>>();
  auto b = j.at("bias").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != in * out ||
      static_cast<int>(b.size()) != out) {
    throw ParseError(path + ": dense layer array sizes do not match dims");
  }
  layer.weights.resize(in, out);
  for (int i = 0; i < in; ++i) {
    for (int jj = 0; jj < out; ++jj) layer.weights(i, jj) = w[i * out + jj];
  }
  layer.bias = Eigen::Map<Eigen::RowVectorXd>(b.data(), out);
  layer.check_finite(path);
  return layer;
}

}  // namespace detail

inline nlohmann::ordered_json network_to_json(const AdaptationNetwork& net) {
  nlohmann::ordered_json j;
  j["format"] = kNetFormat;
  j["input_dim"] = net.input_dim();
  j["latent_dim"] = net.latent_dim();
  j["num_classes"] = net.num_classes();
  j["projection"] = detail::dense_layer_to_json(net.projection());
  j["classifier"] = detail::dense_layer_to_json(net.classifier());
  return j;
}

inline void save_network(const AdaptationNetwork& net,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << network_to_json(net).dump(2) << "\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline AdaptationNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kNetFormat) {
    throw ParseError(path + ": missing or unsupported format tag (expected " +
                     std::string(kNetFormat) + ")");
  }
  try {
    DenseLayer proj = detail::dense_layer_from_json(j.at("projection"), path);
    DenseLayer cls = detail::dense_layer_from_json(j.at("classifier"), path);
    if (proj.out_dim() != cls.in_dim()) {
      throw ParseError(path + ": projection/classifier dimension mismatch");
    }
    Rng dummy(0);
    AdaptationNetwork net(proj.in_dim(), proj.out_dim(), cls.out_dim(),
                          dummy);
    net.projection() = proj;
    net.classifier() = cls;
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace otalign

#endif  // OTALIGN_NET_IO_HPP_
