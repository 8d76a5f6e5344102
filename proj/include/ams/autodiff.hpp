#ifndef AMS_AUTODIFF_HPP
#define AMS_AUTODIFF_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ams/spectral.hpp"

namespace ams::ad {

using Tensor = Eigen::MatrixXd;

// Handle into a Tape. Only valid for the tape that created it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Complex value as a (re, im) pair of real nodes.
struct CVar {
  Var re, im;
};

// Reverse-mode tape. Values are computed eagerly on record; backward() walks
// the nodes in reverse creation order (creation order is topological).
// Single-owner: a tape must not be shared across threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. `leaf` copies the value; `leaf_shared` aliases caller-owned
  // storage that must outlive the tape. Both get gradient slots.
  Var leaf(Tensor value);
  Var leaf_shared(const Tensor* value);
  Var constant(Tensor value);

  // Elementwise and linear primitives.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);            // same shape
  Var colscale(Var mat, Var col);   // mat(i,j) * col(i)
  Var scale(Var a, double s);
  Var add_const(Var a, double c);
  Var neg(Var a);
  Var matmul(Var a, Var b);
  Var affine(Var x, Var w, Var b);  // x*w + row-broadcast bias
  Var relu(Var a);
  Var sin(Var a);
  Var cos(Var a);
  Var reciprocal(Var a);
  Var sqrt(Var a);
  Var log(Var a);
  Var abs(Var a);
  Var clamp_min(Var a, double lo);
  Var square(Var a);

  // Reductions.
  Var sum(Var a);      // 1x1
  Var rowsum(Var a);   // [rows x 1]
  Var colsum(Var a);   // [1 x cols]
  Var mean(Var a);     // 1x1
  Var dot(Var a, Var b);
  Var l2norm(Var a);   // Frobenius norm, 1x1

  // Shape ops.
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int begin, int len);
  Var frames(Var x, int fft_size, int hop, int frame_count);  // row vector in
  Var rev_cumsum(Var a);  // row or column vector

  // Linear map by a constant matrix: x * m.
  Var linmap(Var x, const Tensor& m);
  // Rank-1 product of a column by a constant row.
  Var outer(Var col, const Eigen::RowVectorXd& row);

  // Complex helpers.
  CVar complex_from_parts(Var re, Var im) { return CVar{re, im}; }
  CVar complex_mul(CVar a, CVar b);
  Var complex_abs(CVar a);
  Var complex_rownorm(CVar a);  // [rows x 1] L2 norm across columns of re/im

  // One-sided DFT of per-row time signals zero-padded to tables.frame_len.
  CVar dft(Var time_rows, const DftTables& tables);
  // Real inverse of a single-row one-sided spectrum -> [1 x frame_len].
  Var idft(CVar spectrum, const DftTables& tables);

  // Sinusoidal positional encoding of [rows x 3] coordinates, 10 octaves:
  // per coordinate c and k<10, sin(2^k pi c/scale), cos(2^k pi c/scale).
  Var posenc(Var xyz, double scale);
  // out(p,t) = sum_c weights(p,c) * channels(p, c*len + t).
  Var mix_channels(Var channels, Var weights, int n_channels, int len);

  // Backward passes. backward() requires a 1x1 loss node. backward_multi
  // seeds several nodes at once. Gradients of non-leaf nodes are released
  // as the sweep passes them; leaf gradients remain readable.
  void backward(Var loss);
  void backward_multi(std::span<const std::pair<Var, Tensor>> seeds);

  const Tensor& value(Var v) const { return tensor_of(v); }
  // Gradient of a leaf (or kept node) after backward; zero tensor if the
  // node was not reached.
  Tensor grad(Var v) const;
  // Keep a non-leaf node's value and gradient alive through backward.
  void keep(Var v);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    const Tensor* shared = nullptr;  // set for leaf_shared
    Tensor grad;
    bool has_grad = false;
    bool is_leaf = false;
    bool kept = false;
    bool released = false;
    std::function<void(Tape&, const Tensor&)> backprop;
  };

  const Tensor& tensor_of(Var v) const;
  Var push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop);
  void accum(Var v, const Tensor& g);
  void accum_move(Var v, Tensor&& g);
  void sweep(int from);

  std::vector<Node> nodes_;
  friend struct TapeTestAccess;
};

}  // namespace ams::ad

#endif
