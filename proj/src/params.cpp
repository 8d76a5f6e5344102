#include "ams/params.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams::ad {

int ParamStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter: " + name);
  Param p;
  p.name = name;
  p.grad = Tensor::Zero(init.rows(), init.cols());
  p.m = Tensor::Zero(init.rows(), init.cols());
  p.v = Tensor::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  const int idx = static_cast<int>(params_.size()) - 1;
  index_[name] = idx;
  return idx;
}

Param& ParamStore::by_name(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second];
}

const Param& ParamStore::by_name(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
  return params_[it->second];
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad.setZero();
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  for (const Param& p : params_) {
    if (!p.grad.allFinite()) {
      throw NumericError("adam_step: non-finite gradient for parameter '" +
                         p.name + "'");
    }
  }
  const std::int64_t t = step_ + 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (Param& p : params_) {
    p.m = beta1 * p.m + (1.0 - beta1) * p.grad;
    p.v = (beta2 * p.v.array() + (1.0 - beta2) * p.grad.array().square())
              .matrix();
    const auto m_hat = p.m.array() / bc1;
    const auto v_hat = p.v.array() / bc2;
    p.value.array() -= lr * m_hat / (v_hat.sqrt() + eps);
    if (!p.value.allFinite()) {
      throw NumericError("adam_step: non-finite value for parameter '" +
                         p.name + "'");
    }
    p.grad.setZero();
  }
  step_ = t;
}

void ParamStore::keep_rows(int idx, const std::vector<int>& rows) {
  Param& p = params_.at(idx);
  const int n = static_cast<int>(rows.size());
  Tensor value(n, p.value.cols()), m(n, p.m.cols()), v(n, p.v.cols());
  for (int i = 0; i < n; ++i) {
    value.row(i) = p.value.row(rows[i]);
    m.row(i) = p.m.row(rows[i]);
    v.row(i) = p.v.row(rows[i]);
  }
  p.value = std::move(value);
  p.m = std::move(m);
  p.v = std::move(v);
  p.grad = Tensor::Zero(n, p.value.cols());
}

double cosine_lr(int epoch, double lr_max, double lr_min, int epochs) {
  if (epochs <= 1) return lr_max;
  const double pi = 3.141592653589793238462643383279502884;
  const double t = static_cast<double>(epoch) / (epochs - 1);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(pi * t));
}

}  // namespace ams::ad
