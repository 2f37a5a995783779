// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mtm/tensor.hpp"

namespace mtm {

struct Parameter {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until zero_grad() or a gradient arrives
};

/// Named trainable arrays plus an optional frozen copy of a subset of them
/// (the reference point of the parameter-drift penalty).
class ParameterStore {
 public:
  void add(const std::string& name, Shape shape, std::vector<double> values);
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  const std::map<std::string, Parameter>& all() const { return params_; }
  std::size_t parameter_count() const;

  void zero_grad();

  void take_snapshot(const std::vector<std::string>& names);
  bool has_snapshot() const { return !snapshot_.empty(); }
  const std::map<std::string, std::vector<double>>& snapshot() const { return snapshot_; }
  void clear_snapshot() { snapshot_.clear(); }

  bool operator==(const ParameterStore& other) const;

 private:
  std::map<std::string, Parameter> params_;
  std::map<std::string, std::vector<double>> snapshot_;
};

/// Exposes store parameters to one computation graph. Names accepted by the
/// trainable predicate become gradient leaves; everything else is a constant.
class Binding {
 public:
  explicit Binding(const ParameterStore& store);
  Binding(const ParameterStore& store, std::function<bool(const std::string&)> trainable);

  /// The same tensor is returned for repeated requests.
  Tensor operator()(const std::string& name) const;

  /// Adds leaf gradients (after backward) into the store's grad buffers.
  void accumulate_gradients(ParameterStore& store) const;

 private:
  const ParameterStore* store_;
  std::function<bool(const std::string&)> trainable_;
  mutable std::map<std::string, Tensor> cache_;
};

/// Adam with bias correction; moments are kept per parameter name.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-6)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Updates the named parameters from their gradients.
  void step(ParameterStore& store, const std::vector<std::string>& names);
  std::size_t steps() const { return t_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::map<std::string, Moments> state_;
};

/// Checkpoint file:
///   line 1: "mtm-checkpoint 1"
///   "meta <n>" then n bytes of free-form metadata and a newline
///   one "tensor <name> <rank> <dims...> <offset> <count>" line per tensor
///   "payload <bytes>" then the little-endian float64 payload
/// Offsets are in bytes from the start of the payload.
struct Checkpoint {
  std::string meta;
  ParameterStore params;
};

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const std::string& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Deterministic normal draws for parameter initialisation.
std::vector<double> normal_values(std::size_t n, double stddev, std::mt19937_64& rng);

}  // namespace mtm
