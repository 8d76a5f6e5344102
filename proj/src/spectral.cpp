#include "ams/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "ams/errors.hpp"

namespace ams {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Eigen::VectorXd SpectralGrid::bin_freqs() const {
  Eigen::VectorXd f(n_bins);
  for (int k = 0; k < n_bins; ++k) f[k] = bin_freq(k);
  return f;
}

const DftTables& dft_tables(int in_len, int frame_len) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<DftTables>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{in_len, frame_len}];
  if (!slot) {
    auto t = std::make_unique<DftTables>();
    t->in_len = in_len;
    t->frame_len = frame_len;
    t->n_bins = frame_len / 2 + 1;
    t->fwd_re.resize(in_len, t->n_bins);
    t->fwd_im.resize(in_len, t->n_bins);
    for (int tt = 0; tt < in_len; ++tt) {
      for (int k = 0; k < t->n_bins; ++k) {
        const double ang = 2.0 * kPi * static_cast<double>(k) *
                           static_cast<double>(tt) / frame_len;
        t->fwd_re(tt, k) = std::cos(ang);
        t->fwd_im(tt, k) = -std::sin(ang);
      }
    }
    // Inverse with conjugate-symmetric weights: w0 = wN/2 = 1, else 2.
    t->inv_re.resize(t->n_bins, frame_len);
    t->inv_im.resize(t->n_bins, frame_len);
    const bool even = frame_len % 2 == 0;
    for (int k = 0; k < t->n_bins; ++k) {
      const double w =
          (k == 0 || (even && k == t->n_bins - 1)) ? 1.0 : 2.0;
      for (int tt = 0; tt < frame_len; ++tt) {
        const double ang = 2.0 * kPi * static_cast<double>(k) *
                           static_cast<double>(tt) / frame_len;
        t->inv_re(k, tt) = w * std::cos(ang) / frame_len;
        t->inv_im(k, tt) =
            (k == 0 || (even && k == t->n_bins - 1))
                ? 0.0
                : -w * std::sin(ang) / frame_len;
      }
    }
    slot = std::move(t);
  }
  return *slot;
}

ComplexSpectrum forward_dft(std::span<const double> signal,
                            const SpectralGrid& grid) {
  const int len = static_cast<int>(signal.size());
  if (len > grid.frame_len) {
    throw DataError("forward_dft: signal length " + std::to_string(len) +
                    " exceeds frame length " + std::to_string(grid.frame_len));
  }
  const DftTables& t = dft_tables(len, grid.frame_len);
  Eigen::Map<const Eigen::RowVectorXd> x(signal.data(), len);
  Eigen::RowVectorXd re = x * t.fwd_re;
  Eigen::RowVectorXd im = x * t.fwd_im;
  ComplexSpectrum out;
  out.grid = grid;
  out.bins.resize(grid.n_bins);
  for (int k = 0; k < grid.n_bins; ++k) {
    out.bins[k] = std::complex<double>(re[k], im[k]);
  }
  return out;
}

Eigen::VectorXd inverse_dft(const ComplexSpectrum& spectrum) {
  const SpectralGrid& grid = spectrum.grid;
  if (spectrum.bins.size() != grid.n_bins) {
    throw DataError("inverse_dft: malformed spectrum, expected " +
                    std::to_string(grid.n_bins) + " bins, got " +
                    std::to_string(spectrum.bins.size()));
  }
  const DftTables& t = dft_tables(grid.frame_len, grid.frame_len);
  Eigen::RowVectorXd re(grid.n_bins), im(grid.n_bins);
  for (int k = 0; k < grid.n_bins; ++k) {
    re[k] = spectrum.bins[k].real();
    im[k] = spectrum.bins[k].imag();
  }
  Eigen::RowVectorXd x = re * t.inv_re + im * t.inv_im;
  return x.transpose();
}

Eigen::VectorXd hann_window(int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
  }
  return w;
}

int stft_frame_count(int signal_len, int fft_size, int hop) {
  if (signal_len < fft_size) return 1;
  return (signal_len - fft_size) / hop + 1;
}

Eigen::MatrixXcd stft(std::span<const double> signal, int fft_size) {
  if (fft_size != 512 && fft_size != 1024 && fft_size != 2048) {
    throw ConfigError("stft: fft_size must be one of 512/1024/2048");
  }
  const int hop = fft_size / 4;
  const int len = static_cast<int>(signal.size());
  const int frames = stft_frame_count(len, fft_size, hop);
  const int bins = fft_size / 2 + 1;
  const Eigen::VectorXd win = hann_window(fft_size);
  const DftTables& t = dft_tables(fft_size, fft_size);

  Eigen::MatrixXd framed(frames, fft_size);
  framed.setZero();
  for (int f = 0; f < frames; ++f) {
    const int start = f * hop;
    for (int i = 0; i < fft_size; ++i) {
      const int idx = start + i;
      if (idx < len) framed(f, i) = signal[idx] * win[i];
    }
  }
  Eigen::MatrixXd re = framed * t.fwd_re;
  Eigen::MatrixXd im = framed * t.fwd_im;
  Eigen::MatrixXcd out(frames, bins);
  out.real() = re;
  out.imag() = im;
  return out;
}

Eigen::VectorXd hilbert_envelope(std::span<const double> signal) {
  const int n = static_cast<int>(signal.size());
  if (n == 0) throw DataError("hilbert_envelope: empty signal");
  const DftTables& t = dft_tables(n, n);
  Eigen::Map<const Eigen::RowVectorXd> x(signal.data(), n);
  Eigen::RowVectorXd re = x * t.fwd_re;
  Eigen::RowVectorXd im = x * t.fwd_im;
  // The DC and Nyquist bins of a real signal are real; drop their numerically
  // tiny imaginary residue so they contribute nothing to the quadrature part.
  im[0] = 0.0;
  if (n % 2 == 0) im[t.n_bins - 1] = 0.0;
  // Analytic signal: one-sided reconstruction without taking the real part.
  // Real part is the roundtrip of x; the imaginary (quadrature) part swaps
  // cos/sin roles in the same tables.
  Eigen::RowVectorXd a_re = re * t.inv_re + im * t.inv_im;
  Eigen::RowVectorXd a_im = -(re * t.inv_im) + im * t.inv_re;
  Eigen::VectorXd env(n);
  for (int i = 0; i < n; ++i) {
    env[i] = std::hypot(a_re[i], a_im[i]);
  }
  return env;
}

Eigen::VectorXd schroeder_edc(std::span<const double> rir) {
  const int n = static_cast<int>(rir.size());
  if (n == 0) throw DataError("schroeder_edc: empty signal");
  Eigen::VectorXd energy(n);
  double acc = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    acc += rir[i] * rir[i];
    energy[i] = acc;
  }
  const double total = energy[0];
  if (total <= 0.0) throw DataError("schroeder_edc: all-zero RIR");
  Eigen::VectorXd edc(n);
  for (int i = 0; i < n; ++i) {
    edc[i] = energy[i] > 0.0
                 ? std::max(10.0 * std::log10(energy[i] / total), kEdcFloorDb)
                 : kEdcFloorDb;
  }
  return edc;
}

}  // namespace ams
