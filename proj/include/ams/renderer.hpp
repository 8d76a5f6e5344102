#ifndef AMS_RENDERER_HPP
#define AMS_RENDERER_HPP

#include <Eigen/Dense>
#include <vector>

#include "ams/autodiff.hpp"
#include "ams/model.hpp"
#include "ams/spectral.hpp"
#include "ams/spherical.hpp"

namespace ams {

inline constexpr double kSpeedOfSound = 343.0;

struct RirSignal {
  Eigen::VectorXd samples;  // frame_len (2400)
  Vec3 receiver = Vec3::Zero();
  Vec3 source = Vec3::Zero();
};

// Frequency response of one pole toward `dir`: SH-mix of the coefficient
// signals' spectra, normalized to unit L2 over all bins (a 1e-12 epsilon in
// the denominator guards silent poles). coeffs is [channels x 72].
Eigen::VectorXcd directivity_response(const Eigen::MatrixXd& coeffs,
                                      const AngularPosition& dir,
                                      const SpectralGrid& grid = {});

// Direct (non-tape) evaluation of the forward model for explicit signals and
// coefficients: sum over alive poles of S_p * delay / distance * D~_p.
// signals is [P x 72]; coeffs_per_pole holds [channels x 72] blocks. Poles
// farther than c * frame duration are excluded (their delay would wrap).
RirSignal synthesize_rir(const MultipoleSet& set,
                         const Eigen::MatrixXd& signals,
                         const std::vector<Eigen::MatrixXd>& coeffs_per_pole,
                         const Vec3& x_r, double c = kSpeedOfSound);

// Differentiable render graph for a single receiver. `x_leaf` is the pole
// position leaf and `emitted` the (already spectral) per-pole signal CVar
// [P x n_bins]; the directivity branch is built internally.
struct RenderGraph {
  ad::Var rir;      // [1 x frame_len]
  ad::CVar spectrum;  // [1 x n_bins], kept through backward
};

RenderGraph build_render_graph(ad::Tape& tape, const SplatModel& model,
                               ad::Var x_leaf, ad::CVar emitted,
                               const MlpHead::Leaves& dir_leaves,
                               const Vec3& x_r, double c = kSpeedOfSound);

// Full single-receiver render through the current parameters.
RirSignal render_receiver(const SplatModel& model, const Vec3& x_r,
                          double c = kSpeedOfSound);

// SH basis evaluated on-tape from unit direction vectors [P x 3] via the
// Cartesian polynomial forms; returns [P x (order+1)^2].
ad::Var sh_basis_on_tape(ad::Tape& tape, ad::Var unit, int order);

// Mean one-sided magnitude over a 1/3-octave band (center in Hz) on a
// horizontal/vertical plane grid. Rejects bands above Nyquist.
struct PlaneSpec {
  int axis = 2;          // 0=x, 1=y, 2=z: the fixed coordinate
  double level = 0.0;    // value of the fixed coordinate
  Eigen::Vector2d lo;    // remaining two coordinates, lower corner
  Eigen::Vector2d hi;    // upper corner
};

Eigen::MatrixXd spatial_magnitude_map(const SplatModel& model,
                                      const PlaneSpec& plane, int resolution,
                                      double band_center_hz);

// Inclusive bin range [first, last] of the 1/3-octave band centered at
// `center` on the fixed grid. Throws ConfigError above Nyquist.
std::pair<int, int> third_octave_bins(double center,
                                      const SpectralGrid& grid = {});

}  // namespace ams

#endif
