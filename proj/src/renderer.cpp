#include "ams/renderer.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kNormEps = 1e-12;

double max_render_distance(double c, const SpectralGrid& grid) {
  return c * grid.frame_len / grid.sample_rate;
}
}  // namespace

Eigen::VectorXcd directivity_response(const Eigen::MatrixXd& coeffs,
                                      const AngularPosition& dir,
                                      const SpectralGrid& grid) {
  const int channels = static_cast<int>(coeffs.rows());
  if (coeffs.cols() != kSignalLen) {
    throw ConfigError("directivity_response: coeffs must be [channels x 72]");
  }
  const int order = static_cast<int>(std::sqrt(static_cast<double>(channels))) - 1;
  if ((order + 1) * (order + 1) != channels) {
    throw ConfigError("directivity_response: channel count is not (N+1)^2");
  }
  // Mix the coefficient signals by their harmonic values, then transform;
  // the DFT is linear so this equals mixing the spectra.
  Eigen::VectorXd mixed = Eigen::VectorXd::Zero(kSignalLen);
  for (int c = 0; c < channels; ++c) {
    const double y = real_sph_harm(ShIndex::from_flat(c), dir);
    mixed += y * coeffs.row(c).transpose();
  }
  const DftTables& t = dft_tables(kSignalLen, grid.frame_len);
  Eigen::RowVectorXd re = mixed.transpose() * t.fwd_re;
  Eigen::RowVectorXd im = mixed.transpose() * t.fwd_im;
  const double norm = std::sqrt(re.squaredNorm() + im.squaredNorm());
  const double inv = 1.0 / (norm + kNormEps);
  Eigen::VectorXcd out(grid.n_bins);
  for (int k = 0; k < grid.n_bins; ++k) {
    out[k] = std::complex<double>(re[k] * inv, im[k] * inv);
  }
  return out;
}

RirSignal synthesize_rir(const MultipoleSet& set,
                         const Eigen::MatrixXd& signals,
                         const std::vector<Eigen::MatrixXd>& coeffs_per_pole,
                         const Vec3& x_r, double c) {
  const SpectralGrid grid;
  const int alive = set.alive_count();
  if (alive < 1) throw DataError("synthesize_rir: no alive poles");
  if (signals.rows() != alive ||
      static_cast<int>(coeffs_per_pole.size()) != alive) {
    throw ConfigError("synthesize_rir: per-pole inputs do not match set");
  }
  const DftTables& t72 = dft_tables(kSignalLen, grid.frame_len);
  const double r_max = max_render_distance(c, grid);
  const Eigen::VectorXd freqs = grid.bin_freqs();

  Eigen::RowVectorXd h_re = Eigen::RowVectorXd::Zero(grid.n_bins);
  Eigen::RowVectorXd h_im = Eigen::RowVectorXd::Zero(grid.n_bins);
  for (int p = 0; p < alive; ++p) {
    const Vec3 x_p = set.positions.row(p).transpose();
    const AngularPosition ang = to_angular(x_p, x_r);
    const double r_raw = (x_p - x_r).norm();
    if (r_raw > r_max) continue;  // delay would wrap the frame
    const Eigen::VectorXcd d = directivity_response(coeffs_per_pole[p], ang, grid);
    Eigen::RowVectorXd s_re = signals.row(p) * t72.fwd_re;
    Eigen::RowVectorXd s_im = signals.row(p) * t72.fwd_im;
    const double amp = 1.0 / ang.r;  // ang.r already clamped
    for (int k = 0; k < grid.n_bins; ++k) {
      const double phase = -2.0 * kPi * freqs[k] * r_raw / c;
      const std::complex<double> prop(std::cos(phase), std::sin(phase));
      const std::complex<double> v =
          std::complex<double>(s_re[k], s_im[k]) * prop * d[k] * amp;
      h_re[k] += v.real();
      h_im[k] += v.imag();
    }
  }
  ComplexSpectrum spec;
  spec.grid = grid;
  spec.bins.resize(grid.n_bins);
  for (int k = 0; k < grid.n_bins; ++k) {
    spec.bins[k] = std::complex<double>(h_re[k], h_im[k]);
  }
  RirSignal out;
  out.samples = inverse_dft(spec);
  out.receiver = x_r;
  out.source = set.source_position;
  return out;
}

ad::Var sh_basis_on_tape(ad::Tape& tape, ad::Var unit, int order) {
  using ad::Var;
  if (order < 0 || order > 3) {
    throw ConfigError("sh_basis_on_tape: order must be in 0..3");
  }
  const long rows = tape.value(unit).rows();
  Var x = tape.slice_cols(unit, 0, 1);
  Var y = tape.slice_cols(unit, 1, 1);
  Var z = tape.slice_cols(unit, 2, 1);
  std::vector<Var> cols;
  cols.push_back(tape.constant(ad::Tensor::Constant(rows, 1, 0.28209479177387814)));
  if (order >= 1) {
    const double c1 = 0.4886025119029199;
    cols.push_back(tape.scale(y, c1));
    cols.push_back(tape.scale(z, c1));
    cols.push_back(tape.scale(x, c1));
  }
  Var xx, yy, zz;
  if (order >= 2) {
    xx = tape.square(x);
    yy = tape.square(y);
    zz = tape.square(z);
    cols.push_back(tape.scale(tape.mul(x, y), 1.0925484305920792));
    cols.push_back(tape.scale(tape.mul(y, z), 1.0925484305920792));
    cols.push_back(tape.scale(tape.add_const(tape.scale(zz, 3.0), -1.0),
                              0.31539156525252005));
    cols.push_back(tape.scale(tape.mul(x, z), 1.0925484305920792));
    cols.push_back(tape.scale(tape.sub(xx, yy), 0.5462742152960396));
  }
  if (order >= 3) {
    Var zz5m1 = tape.add_const(tape.scale(zz, 5.0), -1.0);
    cols.push_back(tape.scale(
        tape.mul(y, tape.sub(tape.scale(xx, 3.0), yy)), 0.5900435899266435));
    cols.push_back(tape.scale(tape.mul(tape.mul(x, y), z), 2.890611442640554));
    cols.push_back(tape.scale(tape.mul(y, zz5m1), 0.4570457994644658));
    cols.push_back(tape.scale(
        tape.mul(z, tape.add_const(tape.scale(zz, 5.0), -3.0)),
        0.3731763325901154));
    cols.push_back(tape.scale(tape.mul(x, zz5m1), 0.4570457994644658));
    cols.push_back(tape.scale(tape.mul(z, tape.sub(xx, yy)), 1.445305721320277));
    cols.push_back(tape.scale(
        tape.mul(x, tape.sub(xx, tape.scale(yy, 3.0))), 0.5900435899266435));
  }
  Var out = cols[0];
  for (std::size_t i = 1; i < cols.size(); ++i) {
    out = tape.concat_cols(out, cols[i]);
  }
  return out;
}

RenderGraph build_render_graph(ad::Tape& tape, const SplatModel& model,
                               ad::Var x_leaf, ad::CVar emitted,
                               const MlpHead::Leaves& dir_leaves,
                               const Vec3& x_r, double c) {
  using ad::Var;
  const SpectralGrid grid;
  const int alive = model.alive_count();
  if (alive < 1) throw DataError("render: no alive poles");

  // Geometry: distances and directions from the receiver.
  Var xr_const = tape.constant(x_r.transpose().replicate(alive, 1));
  Var rel = tape.sub(x_leaf, xr_const);
  Var r = tape.sqrt(tape.rowsum(tape.square(rel)));
  Var unit = tape.colscale(rel, tape.reciprocal(tape.clamp_min(r, 1e-12)));

  // Directivity branch and SH mix.
  Var b = model.directivity_forward(tape, x_leaf, x_r, dir_leaves);
  Var basis = sh_basis_on_tape(tape, unit, model.sh_order);
  Var d_time = tape.mix_channels(b, basis, model.dir_channels(), kSignalLen);
  const DftTables& t72 = dft_tables(kSignalLen, grid.frame_len);
  ad::CVar d_spec = tape.dft(d_time, t72);
  Var inv_norm =
      tape.reciprocal(tape.add_const(tape.complex_rownorm(d_spec), kNormEps));
  ad::CVar d_norm{tape.colscale(d_spec.re, inv_norm),
                  tape.colscale(d_spec.im, inv_norm)};

  // Propagation: e^{-j 2 pi f r / c} / r, with wrap-distance exclusion.
  Eigen::RowVectorXd freq_scale = grid.bin_freqs().transpose() * (-2.0 * kPi / c);
  Var arg = tape.outer(r, freq_scale);
  ad::CVar prop{tape.cos(arg), tape.sin(arg)};
  const double r_max = max_render_distance(c, grid);
  const ad::Tensor& r_val = tape.value(r);
  ad::Tensor mask(alive, 1);
  for (int p = 0; p < alive; ++p) mask(p, 0) = r_val(p, 0) <= r_max ? 1.0 : 0.0;
  Var amp = tape.mul(tape.reciprocal(tape.clamp_min(r, kMinPoleDistance)),
                     tape.constant(std::move(mask)));

  ad::CVar mixed = tape.complex_mul(tape.complex_mul(emitted, prop), d_norm);
  ad::CVar contrib{tape.colscale(mixed.re, amp), tape.colscale(mixed.im, amp)};
  ad::CVar spectrum{tape.colsum(contrib.re), tape.colsum(contrib.im)};

  const DftTables& t_frame = dft_tables(grid.frame_len, grid.frame_len);
  RenderGraph g;
  g.spectrum = spectrum;
  g.rir = tape.idft(spectrum, t_frame);
  tape.keep(g.spectrum.re);
  tape.keep(g.spectrum.im);
  tape.keep(g.rir);
  return g;
}

RirSignal render_receiver(const SplatModel& model, const Vec3& x_r, double c) {
  const SpectralGrid grid;
  ad::Tape tape;
  ad::Var x = tape.leaf_shared(&model.store.at(model.pos_param).value);
  ad::Var s = model.signal_forward(tape, x,
                                   model.signal_head.make_leaves(tape, model.store));
  ad::CVar emitted = tape.dft(s, dft_tables(kSignalLen, grid.frame_len));
  RenderGraph g =
      build_render_graph(tape, model, x, emitted,
                         model.dir_head.make_leaves(tape, model.store), x_r, c);
  RirSignal out;
  out.samples = tape.value(g.rir).row(0).transpose();
  out.receiver = x_r;
  out.source = model.source;
  return out;
}

std::pair<int, int> third_octave_bins(double center, const SpectralGrid& grid) {
  const double nyquist = grid.sample_rate / 2.0;
  if (center > nyquist) {
    throw ConfigError("third_octave_bins: band center above Nyquist");
  }
  const double lo = center / std::pow(2.0, 1.0 / 6.0);
  const double hi = center * std::pow(2.0, 1.0 / 6.0);
  const double df = grid.sample_rate / grid.frame_len;
  int first = static_cast<int>(std::ceil(lo / df));
  int last = static_cast<int>(std::floor(hi / df));
  first = std::max(first, 0);
  last = std::min(last, grid.n_bins - 1);
  if (first > last) throw ConfigError("third_octave_bins: empty band");
  return {first, last};
}

Eigen::MatrixXd spatial_magnitude_map(const SplatModel& model,
                                      const PlaneSpec& plane, int resolution,
                                      double band_center_hz) {
  if (resolution < 2) throw ConfigError("spatial_magnitude_map: resolution >= 2");
  const SpectralGrid grid;
  const auto [first, last] = third_octave_bins(band_center_hz, grid);
  Eigen::MatrixXd map(resolution, resolution);
  const int u_axis = plane.axis == 0 ? 1 : 0;
  const int v_axis = plane.axis == 2 ? 1 : 2;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      Vec3 x_r;
      x_r[plane.axis] = plane.level;
      x_r[u_axis] = plane.lo[0] + (plane.hi[0] - plane.lo[0]) * i /
                                      (resolution - 1.0);
      x_r[v_axis] = plane.lo[1] + (plane.hi[1] - plane.lo[1]) * j /
                                      (resolution - 1.0);
      const RirSignal rir = render_receiver(model, x_r);
      const ComplexSpectrum spec = forward_dft(
          std::span<const double>(rir.samples.data(), rir.samples.size()), grid);
      double acc = 0.0;
      for (int k = first; k <= last; ++k) acc += std::abs(spec.bins[k]);
      map(i, j) = acc / (last - first + 1);
    }
  }
  return map;
}

}  // namespace ams
