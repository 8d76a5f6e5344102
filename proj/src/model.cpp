#include "ams/model.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr int kNumSpheres = 34;

MultipoleSet init_spheres(const Vec3& source, int per_sphere, Rng& rng) {
  const int total = kNumSpheres * per_sphere + 1;
  MultipoleSet set;
  set.positions.resize(total, 3);
  set.original_index.resize(total);
  set.source_position = source;
  set.initial_count = total;
  const std::vector<Vec3> lattice = fibonacci_sphere(per_sphere);
  int row = 0;
  for (int s = 0; s < kNumSpheres; ++s) {
    const double radius = s + 1.0;
    const Mat3 rot = random_rotation(rng);
    for (const Vec3& p : lattice) {
      set.positions.row(row) = (source + radius * (rot * p)).transpose();
      set.original_index[row] = row;
      ++row;
    }
  }
  set.positions.row(row) = source.transpose();  // direct-sound pole
  set.original_index[row] = row;
  return set;
}
}  // namespace

MultipoleSet init_dense(const Vec3& source, Rng& rng) {
  return init_spheres(source, 32, rng);
}

MultipoleSet init_sparse(const Vec3& source, int per_sphere, Rng& rng) {
  if (per_sphere < 1) throw ConfigError("init_sparse: per_sphere must be >= 1");
  return init_spheres(source, per_sphere, rng);
}

Eigen::VectorXd positional_encode(const Vec3& x, double scale) {
  if (!(scale > 0.0)) throw ConfigError("positional_encode: scale > 0 required");
  Eigen::VectorXd out(kEncodeDim);
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < 10; ++k) {
      const double w = std::ldexp(kPi, k) / scale;
      out[(c * 10 + k) * 2] = std::sin(w * x[c]);
      out[(c * 10 + k) * 2 + 1] = std::cos(w * x[c]);
    }
  }
  return out;
}

MlpHead MlpHead::create(ad::ParamStore& store, const std::string& prefix,
                        int in_dim, int out_dim, Rng& rng,
                        double final_layer_scale) {
  MlpHead head;
  head.in_dim = in_dim;
  head.out_dim = out_dim;
  auto make_layer = [&](const std::string& name, int in, int out,
                        double scale, int& w_idx, int& b_idx) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    ad::Tensor w(in, out);
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) {
        w(i, j) = scale * rng.uniform(-bound, bound);
      }
    }
    ad::Tensor b(1, out);
    for (int j = 0; j < out; ++j) b(0, j) = scale * rng.uniform(-bound, bound);
    w_idx = store.add(prefix + "." + name + ".w", std::move(w));
    b_idx = store.add(prefix + "." + name + ".b", std::move(b));
  };
  make_layer("l1", in_dim, kMlpHidden, 1.0, head.w1, head.b1);
  make_layer("l2", kMlpHidden, kMlpHidden, 1.0, head.w2, head.b2);
  make_layer("l3", kMlpHidden, out_dim, final_layer_scale, head.w3, head.b3);
  return head;
}

MlpHead::Leaves MlpHead::make_leaves(ad::Tape& tape,
                                     const ad::ParamStore& store) const {
  Leaves l;
  l.w1 = tape.leaf_shared(&store.at(w1).value);
  l.b1 = tape.leaf_shared(&store.at(b1).value);
  l.w2 = tape.leaf_shared(&store.at(w2).value);
  l.b2 = tape.leaf_shared(&store.at(b2).value);
  l.w3 = tape.leaf_shared(&store.at(w3).value);
  l.b3 = tape.leaf_shared(&store.at(b3).value);
  return l;
}

ad::Var MlpHead::forward(ad::Tape& tape, ad::Var x,
                         const Leaves& leaves) const {
  ad::Var h1 = tape.relu(tape.affine(x, leaves.w1, leaves.b1));
  ad::Var h2 = tape.relu(tape.affine(h1, leaves.w2, leaves.b2));
  return tape.affine(h2, leaves.w3, leaves.b3);
}

SplatModel SplatModel::create(MultipoleSet init, int sh_order,
                              double enc_scale, Rng& rng) {
  if (sh_order < 0 || sh_order > 3) {
    throw ConfigError("SplatModel: sh_order must be in 0..3");
  }
  if (init.alive_count() < 1) {
    throw ConfigError("SplatModel: at least one pole required");
  }
  SplatModel m;
  m.sh_order = sh_order;
  m.enc_scale = enc_scale;
  m.source = init.source_position;
  m.initial_count = init.initial_count;
  m.original_index = std::move(init.original_index);
  m.pos_param = m.store.add("poles.positions", std::move(init.positions));
  m.signal_head =
      MlpHead::create(m.store, "signal", kEncodeDim, kSignalLen, rng);
  m.dir_head = MlpHead::create(m.store, "directivity", 2 * kEncodeDim,
                               m.dir_channels() * kSignalLen, rng);
  return m;
}

MultipoleSet SplatModel::multipole_set() const {
  MultipoleSet set;
  set.positions = positions();
  set.original_index = original_index;
  set.source_position = source;
  set.initial_count = initial_count;
  return set;
}

ad::Var SplatModel::signal_forward(ad::Tape& tape, ad::Var x_leaf,
                                   const MlpHead::Leaves& leaves) const {
  ad::Var enc = tape.posenc(x_leaf, enc_scale);
  return signal_head.forward(tape, enc, leaves);
}

ad::Tensor SplatModel::eval_signals() const {
  ad::Tape tape;
  ad::Var x = tape.leaf_shared(&store.at(pos_param).value);
  ad::Var s = signal_forward(tape, x, signal_head.make_leaves(tape, store));
  return tape.value(s);
}

ad::Var SplatModel::directivity_forward(ad::Tape& tape, ad::Var x_leaf,
                                        const Vec3& x_r,
                                        const MlpHead::Leaves& leaves) const {
  const long rows = store.at(pos_param).value.rows();
  ad::Var xr = tape.constant(x_r.transpose().replicate(rows, 1));
  ad::Var rel = tape.sub(x_leaf, xr);
  ad::Var enc_rel = tape.posenc(rel, enc_scale);
  ad::Var enc_abs = tape.posenc(x_leaf, enc_scale);
  ad::Var input = tape.concat_cols(enc_rel, enc_abs);
  return dir_head.forward(tape, input, leaves);
}

ad::Tensor SplatModel::eval_directivity(const Vec3& x_r) const {
  ad::Tape tape;
  ad::Var x = tape.leaf_shared(&store.at(pos_param).value);
  ad::Var b = directivity_forward(tape, x, x_r, dir_head.make_leaves(tape, store));
  return tape.value(b);
}

}  // namespace ams
