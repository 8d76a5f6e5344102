#ifndef AMS_MODEL_HPP
#define AMS_MODEL_HPP

#include <string>
#include <vector>

#include "ams/autodiff.hpp"
#include "ams/params.hpp"
#include "ams/rng.hpp"
#include "ams/spherical.hpp"

namespace ams {

// Emitted signals are 3 ms at 24 kHz.
inline constexpr int kSignalLen = 72;
inline constexpr int kMlpHidden = 512;
inline constexpr int kEncodeDim = 60;  // 3 coords x 10 octaves x (sin, cos)

// Learnable pole positions. Rows are the alive poles; pruning compacts the
// storage, original_index maps rows back to the initial layout.
struct MultipoleSet {
  ad::Tensor positions;  // [alive x 3]
  std::vector<int> original_index;
  Vec3 source_position = Vec3::Zero();
  int initial_count = 0;

  int alive_count() const { return static_cast<int>(positions.rows()); }
};

// 34 spheres (1..34 m) x 32 Fibonacci points, each sphere under its own
// random rotation, plus one pole at the source: 1089 poles.
MultipoleSet init_dense(const Vec3& source, Rng& rng);

// Same layout with per_sphere points per sphere (per_sphere 8 -> 273 poles).
MultipoleSet init_sparse(const Vec3& source, int per_sphere, Rng& rng);

// Sinusoidal positional encoding of one point (non-tape convenience).
Eigen::VectorXd positional_encode(const Vec3& x, double scale);

// 3-layer MLP (ReLU hidden, linear output) whose parameters live in a
// ParamStore.
struct MlpHead {
  int w1 = -1, b1 = -1, w2 = -1, b2 = -1, w3 = -1, b3 = -1;
  int in_dim = 0, out_dim = 0;

  struct Leaves {
    ad::Var w1, b1, w2, b2, w3, b3;
  };

  static MlpHead create(ad::ParamStore& store, const std::string& prefix,
                        int in_dim, int out_dim, Rng& rng,
                        double final_layer_scale = 0.1);

  Leaves make_leaves(ad::Tape& tape, const ad::ParamStore& store) const;
  ad::Var forward(ad::Tape& tape, ad::Var x, const Leaves& leaves) const;

  std::vector<int> param_indices() const { return {w1, b1, w2, b2, w3, b3}; }
};

// The two-branch model: pole positions + signal head (positions -> 72-sample
// emitted signals) + directivity head (relative and absolute encodings ->
// per-pole SH coefficient signals).
class SplatModel {
 public:
  static SplatModel create(MultipoleSet init, int sh_order, double enc_scale,
                           Rng& rng);

  int sh_order = 3;
  double enc_scale = 1.0;
  Vec3 source = Vec3::Zero();
  int initial_count = 0;
  std::vector<int> original_index;

  ad::ParamStore store;
  int pos_param = -1;
  MlpHead signal_head;
  MlpHead dir_head;

  int alive_count() const {
    return static_cast<int>(store.at(pos_param).value.rows());
  }
  int dir_channels() const { return (sh_order + 1) * (sh_order + 1); }
  const ad::Tensor& positions() const { return store.at(pos_param).value; }
  MultipoleSet multipole_set() const;

  // Signal branch: s_p = MLP(posenc(x_p)). Receivers are structurally not an
  // input. Returns [alive x 72].
  ad::Var signal_forward(ad::Tape& tape, ad::Var x_leaf,
                         const MlpHead::Leaves& leaves) const;
  ad::Tensor eval_signals() const;

  // Directivity branch for one receiver:
  // MLP(concat(posenc(x_p - x_r), posenc(x_p))), [alive x channels*72].
  ad::Var directivity_forward(ad::Tape& tape, ad::Var x_leaf, const Vec3& x_r,
                              const MlpHead::Leaves& leaves) const;
  ad::Tensor eval_directivity(const Vec3& x_r) const;
};

}  // namespace ams

#endif
