// otalign/dataset.hpp

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

#ifndef OTALIGN_DATASET_HPP_
#define OTALIGN_DATASET_HPP_

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otalign/error.hpp"

namespace otalign {

enum class Domain { kSource, kTarget };

inline const char* domain_name(Domain d) {
  return d == Domain::kSource ? "source" : "target";
}

// A feature matrix with per-sample optional class labels and a domain tag.
// labels is either empty (fully unlabeled) or has one entry per row, where
// -1 marks a missing label.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  Domain domain = Domain::kSource;
  std::vector<int> class_space;  // sorted distinct labels >= 0

  int num_samples() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }

  bool unlabeled() const {
    return labels.empty() ||
           std::all_of(labels.begin(), labels.end(),
                       [](int l) { return l < 0; });
  }
  bool fully_labeled() const {
    return !labels.empty() && static_cast<int>(labels.size()) ==
                                  num_samples() &&
           std::none_of(labels.begin(), labels.end(),
                        [](int l) { return l < 0; });
  }
  bool partially_labeled() const {
    return !labels.empty() && !unlabeled() && !fully_labeled();
  }

  void recompute_class_space() {
    std::set<int> seen;
    for (int l : labels) {
      if (l >= 0) seen.insert(l);
    }
    class_space.assign(seen.begin(), seen.end());
  }

  Dataset without_labels() const {
    Dataset d;
    d.features = features;
    d.domain = domain;
    return d;
  }

  void validate() const {
    if (features.rows() < 1 || features.cols() < 1) {
      throw InputError("dataset must have at least one sample and one "
                       "feature dimension");
    }
    if (!features.allFinite()) {
      throw InputError("dataset features contain non-finite values");
    }
    if (!labels.empty() &&
        static_cast<int>(labels.size()) != num_samples()) {
      throw InputError("label count does not match sample count");
    }
    for (int l : labels) {
      if (l >= 0 &&
          !std::binary_search(class_space.begin(), class_space.end(), l)) {
        throw InputError("label " + std::to_string(l) +
                         " is missing from the class space");
      }
    }
  }

  static Dataset Labeled(Eigen::MatrixXd x, std::vector<int> y,
                         Domain domain) {
    Dataset d;
    d.features = std::move(x);
    d.labels = std::move(y);
    d.domain = domain;
    d.recompute_class_space();
    d.validate();
    return d;
  }

  static Dataset Unlabeled(Eigen::MatrixXd x, Domain domain) {
    Dataset d;
    d.features = std::move(x);
    d.domain = domain;
    d.validate();
    return d;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double_field(const std::string& s, const std::string& path,
                                 int line_no) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": non-numeric field '" + s + "'");
  }
  return value;
}

inline long parse_int_field(const std::string& s, const std::string& path,
                            int line_no) {
  long value = 0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": non-integer field '" + s + "'");
  }
  return value;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Reads the feature CSV schema: header `id,label,f0,...,f{d-1}`, one sample
// per row, label -1 for unlabeled. Errors name the offending line.
inline Dataset load_features(const std::string& path,
                             Domain domain = Domain::kSource) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError(path + ":1: empty file, expected header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no;
  auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw ParseError(path + ":1: expected header 'id,label,f0,...'");
  }
  const int dim = static_cast<int>(header.size()) - 2;

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 2) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(dim + 2) +
                       " fields, got " + std::to_string(fields.size()));
    }
    detail::parse_int_field(fields[0], path, line_no);  // id, unused
    long label = detail::parse_int_field(fields[1], path, line_no);
    if (label < -1) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": label must be >= 0 or -1, got " +
                       std::to_string(label));
    }
    labels.push_back(static_cast<int>(label));
    std::vector<double> row(dim);
    for (int j = 0; j < dim; ++j) {
      row[j] = detail::parse_double_field(fields[2 + j], path, line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ParseError(path + ": no data rows");
  }

  Dataset d;
  d.features.resize(static_cast<int>(rows.size()), dim);
  for (int i = 0; i < d.features.rows(); ++i) {
    for (int j = 0; j < dim; ++j) d.features(i, j) = rows[i][j];
  }
  if (std::all_of(labels.begin(), labels.end(),
                  [](int l) { return l < 0; })) {
    d.labels.clear();
  } else {
    d.labels = std::move(labels);
  }
  d.domain = domain;
  d.recompute_class_space();
  d.validate();
  return d;
}

// Writes the feature CSV schema with 17-significant-digit decimals so that
// load(save(D)) reproduces the features bit for bit.
inline void save_features(const Dataset& d, const std::string& path) {
  if (path.empty()) throw IoError("empty output path");
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "id,label";
  for (int j = 0; j < d.dim(); ++j) out << ",f" << j;
  out << "\n";
  for (int i = 0; i < d.num_samples(); ++i) {
    int label = d.labels.empty() ? -1 : d.labels[i];
    out << i << "," << label;
    for (int j = 0; j < d.dim(); ++j) {
      out << "," << detail::format_double(d.features(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace otalign

#endif  // OTALIGN_DATASET_HPP_
