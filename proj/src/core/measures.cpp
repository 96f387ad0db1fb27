// Copyright 2026 The mfhjb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/measures.hpp"

#include <cmath>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace mfhjb {

using nlohmann::json;

ParticleEnsemble::ParticleEnsemble(Mat points) : points_(std::move(points)) {
  require(points_.cols() >= 1, ErrorCode::kInvalidArgument, "ensemble needs n >= 1 points");
  require(points_.rows() >= 1, ErrorCode::kInvalidArgument, "ensemble needs d >= 1");
  require(points_.allFinite(), ErrorCode::kNonFinite, "ensemble has non-finite coordinates");
  mean_ = points_.rowwise().mean();
}

ParticleEnsemble ParticleEnsemble::from_rows(const std::vector<std::vector<double>>& rows) {
  require(!rows.empty(), ErrorCode::kInvalidArgument, "ensemble needs n >= 1 points");
  const std::size_t d = rows.front().size();
  Mat pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == d, ErrorCode::kDimensionMismatch,
            "ensemble rows have differing dimensions");
    for (std::size_t k = 0; k < d; ++k) {
      pts(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[i][k];
    }
  }
  return ParticleEnsemble(std::move(pts));
}

std::vector<std::vector<double>> ParticleEnsemble::to_rows() const {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n()),
                                        std::vector<double>(static_cast<std::size_t>(d())));
  for (int i = 0; i < n(); ++i) {
    for (int k = 0; k < d(); ++k) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = points_(k, i);
  }
  return rows;
}

Direction Direction::normalized(const Vec& v) {
  const double norm = v.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorCode::kInvalidArgument,
          "direction must be a finite non-zero vector");
  Direction out(Vec::Unit(v.size(), 0));
  out.theta_ = v / norm;
  return out;
}

Direction::Direction(Vec theta) : theta_(std::move(theta)) {
  require(theta_.size() >= 1, ErrorCode::kInvalidArgument, "direction needs d >= 1");
  require(std::abs(theta_.norm() - 1.0) <= 1e-12, ErrorCode::kInvalidArgument,
          "direction must have unit length");
}

std::vector<double> project(const ParticleEnsemble& ens, const Direction& dir) {
  require(dir.d() == ens.d(), ErrorCode::kDimensionMismatch,
          "project: direction and ensemble dimensions differ");
  const Vec v = ens.points().transpose() * dir.theta();
  return std::vector<double>(v.data(), v.data() + v.size());
}

double second_moment(const ParticleEnsemble& ens) {
  KahanSum s;
  for (int i = 0; i < ens.n(); ++i) s.add(ens.point(i).squaredNorm());
  return s.value() / ens.n();
}

ParticleEnsemble translate(const ParticleEnsemble& ens, const Vec& w) {
  require(w.size() == ens.d(), ErrorCode::kDimensionMismatch,
          "translate: shift and ensemble dimensions differ");
  Mat pts = ens.points();
  pts.colwise() += w;
  return ParticleEnsemble(std::move(pts));
}

ParticleEnsemble permute(const ParticleEnsemble& ens, const std::vector<int>& perm) {
  require(static_cast<int>(perm.size()) == ens.n(), ErrorCode::kDimensionMismatch,
          "permute: permutation length differs from n");
  std::vector<char> seen(perm.size(), 0);
  Mat pts(ens.d(), ens.n());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int j = perm[i];
    require(j >= 0 && j < ens.n() && !seen[static_cast<std::size_t>(j)],
            ErrorCode::kInvalidArgument, "permute: not a permutation");
    seen[static_cast<std::size_t>(j)] = 1;
    pts.col(static_cast<Eigen::Index>(i)) = ens.point(j);
  }
  return ParticleEnsemble(std::move(pts));
}

DistributionSpec DistributionSpec::point_mass(Vec c) {
  DistributionSpec s;
  s.name = "point_mass";
  s.center = std::move(c);
  return s;
}

DistributionSpec DistributionSpec::uniform_box(Vec lo, Vec hi) {
  DistributionSpec s;
  s.name = "uniform_box";
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

DistributionSpec DistributionSpec::gaussian(Vec mean, Vec std) {
  DistributionSpec s;
  s.name = "gaussian";
  s.mean = std::move(mean);
  s.std = std::move(std);
  return s;
}

DistributionSpec DistributionSpec::mixture(std::vector<DistributionSpec> comps,
                                           std::vector<double> w) {
  DistributionSpec s;
  s.name = "mixture";
  s.components = std::move(comps);
  s.weights = std::move(w);
  return s;
}

namespace {

Vec vec_field(const json& j, const char* key, int d, double fallback) {
  if (!j.contains(key)) return Vec::Constant(d, fallback);
  const json& v = j.at(key);
  if (v.is_number()) return Vec::Constant(d, v.get<double>());
  require(v.is_array() && static_cast<int>(v.size()) == d, ErrorCode::kConfig,
          std::string("distribution field '") + key + "' must be a scalar or length-d array");
  Vec out(d);
  for (int k = 0; k < d; ++k) out[k] = v.at(static_cast<std::size_t>(k)).get<double>();
  return out;
}

DistributionSpec spec_from(const json& j, int d) {
  require(j.is_object() && j.contains("name"), ErrorCode::kConfig,
          "distribution spec needs a 'name'");
  const std::string name = j.at("name").get<std::string>();
  if (name == "point_mass") return DistributionSpec::point_mass(vec_field(j, "center", d, 0.0));
  if (name == "uniform_box") {
    return DistributionSpec::uniform_box(vec_field(j, "lo", d, -1.0), vec_field(j, "hi", d, 1.0));
  }
  if (name == "gaussian") {
    return DistributionSpec::gaussian(vec_field(j, "mean", d, 0.0), vec_field(j, "std", d, 1.0));
  }
  if (name == "mixture") {
    require(j.contains("components") && j.at("components").is_array(), ErrorCode::kConfig,
            "mixture needs a 'components' array");
    std::vector<DistributionSpec> comps;
    for (const auto& c : j.at("components")) comps.push_back(spec_from(c, d));
    std::vector<double> w;
    if (j.contains("weights")) {
      w = j.at("weights").get<std::vector<double>>();
    } else {
      w.assign(comps.size(), 1.0);
    }
    return DistributionSpec::mixture(std::move(comps), std::move(w));
  }
  fail(ErrorCode::kUnknownName, "unknown distribution '" + name + "'");
}

void validate(const DistributionSpec& s, int d) {
  auto check = [&](const Vec& v, const char* what) {
    require(v.size() == d, ErrorCode::kDimensionMismatch,
            std::string(s.name) + ": '" + what + "' has the wrong dimension");
    require(v.allFinite(), ErrorCode::kNonFinite, std::string(s.name) + ": non-finite '" + what + "'");
  };
  if (s.name == "point_mass") {
    check(s.center, "center");
  } else if (s.name == "uniform_box") {
    check(s.lo, "lo");
    check(s.hi, "hi");
    require((s.hi.array() >= s.lo.array()).all(), ErrorCode::kInvalidArgument,
            "uniform_box: hi must dominate lo");
  } else if (s.name == "gaussian") {
    check(s.mean, "mean");
    check(s.std, "std");
    require((s.std.array() >= 0.0).all(), ErrorCode::kInvalidArgument,
            "gaussian: std must be non-negative");
  } else if (s.name == "mixture") {
    require(!s.components.empty() && s.components.size() == s.weights.size(),
            ErrorCode::kInvalidArgument, "mixture: components and weights must match");
    double total = 0.0;
    for (std::size_t c = 0; c < s.components.size(); ++c) {
      require(s.weights[c] >= 0.0 && std::isfinite(s.weights[c]), ErrorCode::kInvalidArgument,
              "mixture: weights must be finite and non-negative");
      total += s.weights[c];
      validate(s.components[c], d);
    }
    require(total > 0.0, ErrorCode::kInvalidArgument, "mixture: weights sum to zero");
  } else {
    fail(ErrorCode::kUnknownName, "unknown distribution '" + s.name + "'");
  }
}

Vec draw(const DistributionSpec& s, int d, Stream& rng) {
  if (s.name == "point_mass") return s.center;
  if (s.name == "uniform_box") {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = s.lo[k] + (s.hi[k] - s.lo[k]) * rng.uniform();
    return x;
  }
  if (s.name == "gaussian") {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = s.mean[k] + s.std[k] * rng.normal();
    return x;
  }
  double total = 0.0;
  for (double w : s.weights) total += w;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t pick = s.components.size() - 1;
  for (std::size_t c = 0; c < s.components.size(); ++c) {
    acc += s.weights[c];
    if (u < acc) {
      pick = c;
      break;
    }
  }
  return draw(s.components[pick], d, rng);
}

}  // namespace

DistributionSpec DistributionSpec::from_json(const std::string& json_text, int d) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("distribution JSON: ") + e.what());
  }
  try {
    return spec_from(j, d);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("distribution JSON: ") + e.what());
  }
}

ParticleEnsemble sample_iid(const DistributionSpec& dist, int n, int d, std::uint64_t seed) {
  require(n >= 1 && d >= 1, ErrorCode::kInvalidArgument, "sample_iid: need n >= 1 and d >= 1");
  validate(dist, d);
  Mat pts(d, n);
  for (int i = 0; i < n; ++i) {
    Stream rng({seed, Channel::kSampling, 0, static_cast<std::uint32_t>(i), 0});
    pts.col(i) = draw(dist, d, rng);
  }
  return ParticleEnsemble(std::move(pts));
}

std::string ensemble_to_json(const ParticleEnsemble& ens) { return json(ens.to_rows()).dump(); }

ParticleEnsemble ensemble_from_json(const std::string& json_text) {
  try {
    const json j = json::parse(json_text);
    require(j.is_array(), ErrorCode::kConfig, "ensemble JSON must be an array of arrays");
    return ParticleEnsemble::from_rows(j.get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("ensemble JSON: ") + e.what());
  }
}

}  // namespace mfhjb
