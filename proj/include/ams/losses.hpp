#ifndef AMS_LOSSES_HPP
#define AMS_LOSSES_HPP

#include <Eigen/Dense>
#include <array>

#include "ams/autodiff.hpp"
#include "ams/renderer.hpp"

namespace ams {

struct LossWeights {
  double spectral = 1.0;
  double amplitude = 0.5;
  double phase = 0.5;
  double time = 100.0;
  double mrstft = 1.0;
  double edc = 5.0;
};

struct LossReport {
  double spectral = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double time = 0.0;
  double mrstft = 0.0;
  double edc = 0.0;
  double total = 0.0;

  LossReport& operator+=(const LossReport& o);
  LossReport& operator*=(double s);
};

inline constexpr std::array<int, 3> kMrstftSizes{512, 1024, 2048};
inline constexpr double kMrstftLogEps = 1e-7;
inline constexpr double kEdcLossEps = 1e-8;

// Precomputed ground-truth quantities shared by every loss evaluation against
// the same target. Throws DataError for an all-zero target.
struct TruthCache {
  Eigen::VectorXd h;             // [2400]
  ad::Tensor spec_re, spec_im;   // [1 x 1201]
  ad::Tensor mag;                // [1 x 1201]
  ad::Tensor phase_weight;       // [1 x 1201], |H_k| / sum|H|
  std::array<ad::Tensor, 3> stft_mag;      // per fft size, [frames x bins]
  std::array<ad::Tensor, 3> stft_log_mag;  // log(|S| + eps)
  std::array<double, 3> stft_fro_norm;     // ||S||_F
  ad::Tensor log_edc_energy;     // [1 x 2400], log10(E + eps)
};

TruthCache make_truth_cache(const Eigen::VectorXd& truth);

// The six-term objective on a predicted [1 x 2400] node. Individual term
// nodes are kept so their values can be read after backward.
struct LossGraph {
  ad::Var total;
  ad::Var spectral, amplitude, phase, time, mrstft, edc;
  LossReport report(const ad::Tape& tape) const;
};

LossGraph build_loss_graph(ad::Tape& tape, ad::Var pred,
                           const TruthCache& truth, const LossWeights& w);

// Non-differentiable convenience over two rendered/measured signals.
LossReport total_loss(const RirSignal& pred, const RirSignal& truth,
                      const LossWeights& w = {});
LossReport total_loss(const Eigen::VectorXd& pred, const TruthCache& truth,
                      const LossWeights& w = {});

// End-to-end finite-difference validation of the training gradients on a toy
// scene; returns the maximum relative error over all six terms. Defined in
// the trainer (it drives the full model path).
class SplatModel;
double loss_gradient_check(SplatModel& model,
                           const std::vector<Vec3>& receivers,
                           const std::vector<Eigen::VectorXd>& truths,
                           int params_per_term, std::uint64_t seed);

}  // namespace ams

#endif
