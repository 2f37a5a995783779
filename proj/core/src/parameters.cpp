// SPDX-License-Identifier: Apache-2.0
#include "mtm/parameters.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtm/error.hpp"

namespace mtm {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void ParameterStore::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("ParameterStore::add", name + " " + shape_string(shape));
  }
  if (!params_.emplace(name, Parameter{std::move(shape), std::move(values), {}}).second) {
    throw ContractError("duplicate parameter \"" + name + "\"");
  }
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw LookupError("unknown parameter \"" + name + "\"");
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw LookupError("unknown parameter \"" + name + "\"");
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

std::vector<std::string> ParameterStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) {
    if (name.compare(0, prefix.size(), prefix) == 0) out.push_back(name);
  }
  return out;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [name, p] : params_) p.grad.assign(p.value.size(), 0.0);
}

void ParameterStore::take_snapshot(const std::vector<std::string>& names) {
  snapshot_.clear();
  for (const auto& name : names) snapshot_.emplace(name, at(name).value);
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (const auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end() || it->second.shape != p.shape || it->second.value != p.value) return false;
  }
  return true;
}

Binding::Binding(const ParameterStore& store)
    : store_(&store), trainable_([](const std::string&) { return false; }) {}

Binding::Binding(const ParameterStore& store, std::function<bool(const std::string&)> trainable)
    : store_(&store), trainable_(std::move(trainable)) {}

Tensor Binding::operator()(const std::string& name) const {
  if (auto it = cache_.find(name); it != cache_.end()) return it->second;
  const auto& p = store_->at(name);
  Tensor t = trainable_(name) ? Tensor::leaf(p.shape, p.value) : Tensor::constant(p.shape, p.value);
  cache_.emplace(name, t);
  return t;
}

void Binding::accumulate_gradients(ParameterStore& store) const {
  for (const auto& [name, t] : cache_) {
    if (!t.requires_grad() || t.grad().empty()) continue;
    auto& p = store.at(name);
    if (p.grad.empty()) p.grad.assign(p.value.size(), 0.0);
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += t.grad()[i];
  }
}

void AdamOptimizer::step(ParameterStore& store, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    if (store.at(name).grad.empty()) {
      throw ContractError("adam: parameter \"" + name + "\" has no gradient");
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& name : names) {
    auto& p = store.at(name);
    auto& s = state_[name];
    if (s.m.empty()) {
      s.m.assign(p.value.size(), 0.0);
      s.v.assign(p.value.size(), 0.0);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
      s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = s.m[i] / c1;
      const double v_hat = s.v[i] / c2;
      p.value[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const std::string& meta) {
  std::ostringstream header;
  header << "mtm-checkpoint 1\n";
  header << "meta " << meta.size() << '\n' << meta << '\n';
  std::size_t offset = 0;
  for (const auto& [name, p] : params.all()) {
    if (name.find_first_of(" \n\t") != std::string::npos) {
      throw ContractError("checkpoint: parameter name \"" + name + "\" contains whitespace");
    }
    header << "tensor " << name << ' ' << p.shape.size();
    for (auto d : p.shape) header << ' ' << d;
    header << ' ' << offset << ' ' << p.value.size() << '\n';
    offset += p.value.size() * sizeof(double);
  }
  header << "payload " << offset << '\n';

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& [name, p] : params.all()) {
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto fail = [&](const std::string& what) { return ParseError(path.string() + ": " + what); };

  std::string line;
  if (!std::getline(in, line) || line != "mtm-checkpoint 1") throw fail("not a version-1 checkpoint");
  Checkpoint ckpt;
  std::size_t meta_len = 0;
  {
    if (!std::getline(in, line)) throw fail("missing meta line");
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> meta_len) || tag != "meta") throw fail("bad meta line");
    ckpt.meta.resize(meta_len);
    if (!in.read(ckpt.meta.data(), static_cast<std::streamsize>(meta_len)) || in.get() != '\n') {
      throw fail("truncated meta block");
    }
  }
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset, count;
  };
  std::vector<Entry> entries;
  std::size_t payload = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "payload") {
      if (!(ls >> payload)) throw fail("bad payload line");
      break;
    }
    if (tag != "tensor") throw fail("unexpected manifest line \"" + line + "\"");
    Entry e;
    std::size_t rank = 0;
    if (!(ls >> e.name >> rank)) throw fail("bad tensor line \"" + line + "\"");
    e.shape.resize(rank);
    for (auto& d : e.shape) ls >> d;
    if (!(ls >> e.offset >> e.count) || shape_size(e.shape) != e.count) {
      throw fail("bad tensor line \"" + line + "\"");
    }
    entries.push_back(std::move(e));
  }
  std::vector<double> data(payload / sizeof(double));
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(payload))) {
    throw fail("truncated payload");
  }
  for (auto& e : entries) {
    if (e.offset % sizeof(double) != 0 || e.offset + e.count * sizeof(double) > payload) {
      throw fail("tensor \"" + e.name + "\" lies outside the payload");
    }
    const auto first = data.begin() + static_cast<std::ptrdiff_t>(e.offset / sizeof(double));
    ckpt.params.add(e.name, e.shape, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(e.count)));
  }
  return ckpt;
}

std::vector<double> normal_values(std::size_t n, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

}  // namespace mtm
