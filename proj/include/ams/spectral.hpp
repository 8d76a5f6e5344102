#ifndef AMS_SPECTRAL_HPP
#define AMS_SPECTRAL_HPP

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace ams {

// Fixed analysis contract: 24 kHz, 0.1 s frame, one-sided spectrum.
struct SpectralGrid {
  double sample_rate = 24000.0;
  int frame_len = 2400;
  int n_bins = 1201;  // frame_len / 2 + 1

  double bin_freq(int k) const { return k * sample_rate / frame_len; }
  Eigen::VectorXd bin_freqs() const;
};

struct ComplexSpectrum {
  Eigen::VectorXcd bins;  // length grid.n_bins
  SpectralGrid grid;
};

// One-sided DFT of a signal zero-padded to grid.frame_len. Throws DataError
// if the signal is longer than the frame.
ComplexSpectrum forward_dft(std::span<const double> signal,
                            const SpectralGrid& grid = {});

// Real inverse of a one-sided spectrum. The imaginary parts of the DC and
// Nyquist bins are ignored (a real frame has none).
Eigen::VectorXd inverse_dft(const ComplexSpectrum& spectrum);

// Periodic Hann window.
Eigen::VectorXd hann_window(int n);

// Windowed short-time transform, hop = fft_size / 4, periodic Hann.
// Frames x (fft_size/2 + 1); a signal shorter than fft_size yields a single
// zero-padded frame.
Eigen::MatrixXcd stft(std::span<const double> signal, int fft_size);

int stft_frame_count(int signal_len, int fft_size, int hop);

// Magnitude of the analytic signal (one-sided spectrum doubling).
Eigen::VectorXd hilbert_envelope(std::span<const double> signal);

// Backward-integrated energy decay in dB, 0 dB at t = 0, floor at -120 dB.
// Throws DataError for an all-zero input.
Eigen::VectorXd schroeder_edc(std::span<const double> rir);

// Shared cos/sin tables for the linear transforms above and for the
// differentiable DFT ops. For entry (t, k): cos(2*pi*k*t/frame_len) and
// -sin(2*pi*k*t/frame_len), t < in_len rows, k < frame_len/2+1 columns.
struct DftTables {
  int in_len = 0;
  int frame_len = 0;
  int n_bins = 0;
  Eigen::MatrixXd fwd_re;  // [in_len x n_bins]
  Eigen::MatrixXd fwd_im;  // [in_len x n_bins]
  // Inverse map (bins -> frame): real_part * inv_re + imag_part * inv_im.
  Eigen::MatrixXd inv_re;  // [n_bins x frame_len]
  Eigen::MatrixXd inv_im;  // [n_bins x frame_len]
};

// Cached table lookup; built once per (in_len, frame_len), thread-safe.
const DftTables& dft_tables(int in_len, int frame_len);

inline constexpr double kEdcFloorDb = -120.0;

}  // namespace ams

#endif
