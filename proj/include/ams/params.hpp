#ifndef AMS_PARAMS_HPP
#define AMS_PARAMS_HPP

#include <Eigen/Dense>
#include <string>
#include <unordered_map>
#include <vector>

namespace ams::ad {

using Tensor = Eigen::MatrixXd;

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment
};

// Named parameter tensors with gradient slots and Adam state. Gradients are
// accumulated by the training loop and cleared by adam_step.
class ParamStore {
 public:
  int add(const std::string& name, Tensor init);
  Param& at(int idx) { return params_.at(idx); }
  const Param& at(int idx) const { return params_.at(idx); }
  Param& by_name(const std::string& name);
  const Param& by_name(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  int count() const { return static_cast<int>(params_.size()); }

  void zero_grads();

  // Bias-corrected Adam on every parameter; clears gradients afterwards.
  // Throws NumericError (naming the parameter) if a gradient or an updated
  // value is non-finite; no parameter is modified on rejection.
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t s) { step_ = s; }

  // Keep only the given rows of a parameter's value and moments (pruning);
  // the gradient is resized to zero.
  void keep_rows(int idx, const std::vector<int>& rows);

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, int> index_;
  std::int64_t step_ = 0;
};

// lr_min + 0.5 (lr_max - lr_min) (1 + cos(pi * epoch / (epochs - 1))).
double cosine_lr(int epoch, double lr_max, double lr_min, int epochs);

}  // namespace ams::ad

#endif
