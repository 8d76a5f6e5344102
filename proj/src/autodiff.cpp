#include "ams/autodiff.hpp"

#include <cmath>

#include "ams/errors.hpp"

namespace ams::ad {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError(std::string(op) + ": shape mismatch (" +
                      std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                      " vs " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()) + ")");
  }
}
}  // namespace

const Tensor& Tape::tensor_of(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.released) throw NumericError("tape: value accessed after release");
  return n.shared ? *n.shared : n.value;
}

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> bp) {
  Node n;
  n.value = std::move(value);
  n.backprop = std::move(bp);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value) {
  Var v = push(std::move(value), nullptr);
  nodes_[v.id].is_leaf = true;
  return v;
}

Var Tape::leaf_shared(const Tensor* value) {
  Var v = push(Tensor(), nullptr);
  nodes_[v.id].is_leaf = true;
  nodes_[v.id].shared = value;
  return v;
}

Var Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

void Tape::accum(Var v, const Tensor& g) {
  Node& n = nodes_[v.id];
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Tape::accum_move(Var v, Tensor&& g) {
  Node& n = nodes_[v.id];
  if (!n.has_grad) {
    n.grad = std::move(g);
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Var Tape::add(Var a, Var b) {
  check_same_shape(tensor_of(a), tensor_of(b), "add");
  Tensor out = tensor_of(a) + tensor_of(b);
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accum(a, g);
    t.accum(b, g);
  });
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(tensor_of(a), tensor_of(b), "sub");
  Tensor out = tensor_of(a) - tensor_of(b);
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accum(a, g);
    t.accum_move(b, -g);
  });
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(tensor_of(a), tensor_of(b), "mul");
  Tensor out = tensor_of(a).cwiseProduct(tensor_of(b));
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accum_move(a, g.cwiseProduct(t.tensor_of(b)));
    t.accum_move(b, g.cwiseProduct(t.tensor_of(a)));
  });
}

Var Tape::colscale(Var mat, Var col) {
  const Tensor& m = tensor_of(mat);
  const Tensor& c = tensor_of(col);
  if (c.cols() != 1 || c.rows() != m.rows()) {
    throw ConfigError("colscale: column shape mismatch");
  }
  Tensor out = (m.array().colwise() * c.col(0).array()).matrix();
  return push(std::move(out), [mat, col](Tape& t, const Tensor& g) {
    const Tensor& m = t.tensor_of(mat);
    const Tensor& c = t.tensor_of(col);
    t.accum_move(mat, (g.array().colwise() * c.col(0).array()).matrix());
    t.accum_move(col, g.cwiseProduct(m).rowwise().sum());
  });
}

Var Tape::scale(Var a, double s) {
  Tensor out = tensor_of(a) * s;
  return push(std::move(out), [a, s](Tape& t, const Tensor& g) {
    t.accum_move(a, g * s);
  });
}

Var Tape::add_const(Var a, double c) {
  Tensor out = (tensor_of(a).array() + c).matrix();
  return push(std::move(out),
              [a](Tape& t, const Tensor& g) { t.accum(a, g); });
}

Var Tape::neg(Var a) {
  Tensor out = -tensor_of(a);
  return push(std::move(out),
              [a](Tape& t, const Tensor& g) { t.accum_move(a, -g); });
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& av = tensor_of(a);
  const Tensor& bv = tensor_of(b);
  if (av.cols() != bv.rows()) throw ConfigError("matmul: inner dim mismatch");
  Tensor out = av * bv;
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accum_move(a, g * t.tensor_of(b).transpose());
    t.accum_move(b, t.tensor_of(a).transpose() * g);
  });
}

Var Tape::affine(Var x, Var w, Var b) {
  const Tensor& xv = tensor_of(x);
  const Tensor& wv = tensor_of(w);
  const Tensor& bv = tensor_of(b);
  if (xv.cols() != wv.rows()) throw ConfigError("affine: inner dim mismatch");
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    throw ConfigError("affine: bias must be [1 x out]");
  }
  Tensor out = (xv * wv).rowwise() + bv.row(0);
  return push(std::move(out), [x, w, b](Tape& t, const Tensor& g) {
    t.accum_move(x, g * t.tensor_of(w).transpose());
    t.accum_move(w, t.tensor_of(x).transpose() * g);
    t.accum_move(b, g.colwise().sum());
  });
}

Var Tape::relu(Var a) {
  Tensor out = tensor_of(a).cwiseMax(0.0);
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[self].value;
    t.accum_move(a, (y.array() > 0.0).select(g, Tensor::Zero(g.rows(), g.cols())));
  });
}

Var Tape::sin(Var a) {
  Tensor out = tensor_of(a).array().sin().matrix();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    t.accum_move(a, g.cwiseProduct(t.tensor_of(a).array().cos().matrix()));
  });
}

Var Tape::cos(Var a) {
  Tensor out = tensor_of(a).array().cos().matrix();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    t.accum_move(a, -g.cwiseProduct(t.tensor_of(a).array().sin().matrix()));
  });
}

Var Tape::reciprocal(Var a) {
  Tensor out = tensor_of(a).cwiseInverse();
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[self].value;
    t.accum_move(a, -g.cwiseProduct(y).cwiseProduct(y));
  });
}

Var Tape::sqrt(Var a) {
  Tensor out = tensor_of(a).cwiseSqrt();
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[self].value;
    Tensor d = (g.array() / (2.0 * y.array()).max(1e-300)).matrix();
    t.accum_move(a, std::move(d));
  });
}

Var Tape::log(Var a) {
  Tensor out = tensor_of(a).array().log().matrix();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    t.accum_move(a, g.cwiseQuotient(t.tensor_of(a)));
  });
}

Var Tape::abs(Var a) {
  Tensor out = tensor_of(a).cwiseAbs();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a, g.cwiseProduct(x.array().sign().matrix()));
  });
}

Var Tape::clamp_min(Var a, double lo) {
  Tensor out = tensor_of(a).cwiseMax(lo);
  return push(std::move(out), [a, lo](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a,
                 (x.array() > lo).select(g, Tensor::Zero(g.rows(), g.cols())));
  });
}

Var Tape::square(Var a) {
  Tensor out = tensor_of(a).array().square().matrix();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    t.accum_move(a, 2.0 * g.cwiseProduct(t.tensor_of(a)));
  });
}

Var Tape::sum(Var a) {
  Tensor out(1, 1);
  out(0, 0) = tensor_of(a).sum();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a, Tensor::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var Tape::rowsum(Var a) {
  Tensor out = tensor_of(a).rowwise().sum();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a, g.col(0).replicate(1, x.cols()));
  });
}

Var Tape::colsum(Var a) {
  Tensor out = tensor_of(a).colwise().sum();
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a, g.row(0).replicate(x.rows(), 1));
  });
}

Var Tape::mean(Var a) {
  const Tensor& x = tensor_of(a);
  const double inv = 1.0 / static_cast<double>(x.size());
  Tensor out(1, 1);
  out(0, 0) = x.sum() * inv;
  return push(std::move(out), [a, inv](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    t.accum_move(a, Tensor::Constant(x.rows(), x.cols(), g(0, 0) * inv));
  });
}

Var Tape::dot(Var a, Var b) {
  check_same_shape(tensor_of(a), tensor_of(b), "dot");
  Tensor out(1, 1);
  out(0, 0) = tensor_of(a).cwiseProduct(tensor_of(b)).sum();
  return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
    t.accum_move(a, g(0, 0) * t.tensor_of(b));
    t.accum_move(b, g(0, 0) * t.tensor_of(a));
  });
}

Var Tape::l2norm(Var a) {
  Tensor out(1, 1);
  out(0, 0) = tensor_of(a).norm();
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const double n = std::max(t.nodes_[self].value(0, 0), 1e-300);
    t.accum_move(a, (g(0, 0) / n) * t.tensor_of(a));
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& av = tensor_of(a);
  const Tensor& bv = tensor_of(b);
  if (av.rows() != bv.rows()) throw ConfigError("concat_cols: row mismatch");
  Tensor out(av.rows(), av.cols() + bv.cols());
  out.leftCols(av.cols()) = av;
  out.rightCols(bv.cols()) = bv;
  const int ac = static_cast<int>(av.cols());
  const int bc = static_cast<int>(bv.cols());
  return push(std::move(out), [a, b, ac, bc](Tape& t, const Tensor& g) {
    t.accum_move(a, g.leftCols(ac));
    t.accum_move(b, g.rightCols(bc));
  });
}

Var Tape::slice_cols(Var a, int begin, int len) {
  const Tensor& av = tensor_of(a);
  if (begin < 0 || begin + len > av.cols()) {
    throw ConfigError("slice_cols: range out of bounds");
  }
  Tensor out = av.middleCols(begin, len);
  return push(std::move(out), [a, begin, len](Tape& t, const Tensor& g) {
    const Tensor& x = t.tensor_of(a);
    Tensor d = Tensor::Zero(x.rows(), x.cols());
    d.middleCols(begin, len) = g;
    t.accum_move(a, std::move(d));
  });
}

Var Tape::frames(Var x, int fft_size, int hop, int frame_count) {
  const Tensor& xv = tensor_of(x);
  if (xv.rows() != 1) throw ConfigError("frames: expects a row vector");
  const int len = static_cast<int>(xv.cols());
  Tensor out = Tensor::Zero(frame_count, fft_size);
  for (int f = 0; f < frame_count; ++f) {
    const int start = f * hop;
    const int n = std::min(fft_size, len - start);
    if (n > 0) out.row(f).head(n) = xv.row(0).segment(start, n);
  }
  return push(std::move(out),
              [x, fft_size, hop, frame_count](Tape& t, const Tensor& g) {
                const Tensor& xv = t.tensor_of(x);
                const int len = static_cast<int>(xv.cols());
                Tensor d = Tensor::Zero(1, len);
                for (int f = 0; f < frame_count; ++f) {
                  const int start = f * hop;
                  const int n = std::min(fft_size, len - start);
                  if (n > 0) d.row(0).segment(start, n) += g.row(f).head(n);
                }
                t.accum_move(x, std::move(d));
              });
}

Var Tape::rev_cumsum(Var a) {
  const Tensor& av = tensor_of(a);
  if (av.rows() != 1 && av.cols() != 1) {
    throw ConfigError("rev_cumsum: expects a vector");
  }
  Tensor out = av;
  double* data = out.data();
  const int n = static_cast<int>(out.size());
  for (int i = n - 2; i >= 0; --i) data[i] += data[i + 1];
  return push(std::move(out), [a](Tape& t, const Tensor& g) {
    Tensor d = g;
    double* p = d.data();
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) p[i] += p[i - 1];
    t.accum_move(a, std::move(d));
  });
}

Var Tape::linmap(Var x, const Tensor& m) {
  const Tensor& xv = tensor_of(x);
  if (xv.cols() != m.rows()) throw ConfigError("linmap: inner dim mismatch");
  Tensor out = xv * m;
  return push(std::move(out), [x, &m](Tape& t, const Tensor& g) {
    t.accum_move(x, g * m.transpose());
  });
}

Var Tape::outer(Var col, const Eigen::RowVectorXd& row) {
  const Tensor& c = tensor_of(col);
  if (c.cols() != 1) throw ConfigError("outer: expects a column vector");
  Tensor out = c * row;
  return push(std::move(out), [col, row](Tape& t, const Tensor& g) {
    t.accum_move(col, g * row.transpose());
  });
}

CVar Tape::complex_mul(CVar a, CVar b) {
  Var re = sub(mul(a.re, b.re), mul(a.im, b.im));
  Var im = add(mul(a.re, b.im), mul(a.im, b.re));
  return CVar{re, im};
}

Var Tape::complex_abs(CVar a) {
  const Tensor& re = tensor_of(a.re);
  const Tensor& im = tensor_of(a.im);
  check_same_shape(re, im, "complex_abs");
  Tensor out = (re.array().square() + im.array().square()).sqrt().matrix();
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[self].value;
    Tensor inv = (y.array().max(1e-300)).inverse().matrix();
    t.accum_move(a.re, g.cwiseProduct(t.tensor_of(a.re)).cwiseProduct(inv));
    t.accum_move(a.im, g.cwiseProduct(t.tensor_of(a.im)).cwiseProduct(inv));
  });
}

Var Tape::complex_rownorm(CVar a) {
  const Tensor& re = tensor_of(a.re);
  const Tensor& im = tensor_of(a.im);
  check_same_shape(re, im, "complex_rownorm");
  Tensor out = (re.array().square().rowwise().sum() +
                im.array().square().rowwise().sum())
                   .sqrt()
                   .matrix();
  return push(std::move(out), [a, self = size()](Tape& t, const Tensor& g) {
    const Tensor& n = t.nodes_[self].value;
    Eigen::ArrayXd s = g.col(0).array() / n.col(0).array().max(1e-300);
    t.accum_move(a.re, (t.tensor_of(a.re).array().colwise() * s).matrix());
    t.accum_move(a.im, (t.tensor_of(a.im).array().colwise() * s).matrix());
  });
}

CVar Tape::dft(Var time_rows, const DftTables& tables) {
  const Tensor& x = tensor_of(time_rows);
  if (x.cols() != tables.in_len) {
    throw ConfigError("dft: input length does not match tables");
  }
  Var re = linmap(time_rows, tables.fwd_re);
  Var im = linmap(time_rows, tables.fwd_im);
  return CVar{re, im};
}

Var Tape::idft(CVar spectrum, const DftTables& tables) {
  const Tensor& re = tensor_of(spectrum.re);
  if (re.cols() != tables.n_bins) {
    throw ConfigError("idft: bin count does not match tables");
  }
  Var a = linmap(spectrum.re, tables.inv_re);
  Var b = linmap(spectrum.im, tables.inv_im);
  return add(a, b);
}

Var Tape::posenc(Var xyz, double scale) {
  const Tensor& x = tensor_of(xyz);
  if (x.cols() != 3) throw ConfigError("posenc: expects [rows x 3]");
  if (!(scale > 0.0)) throw ConfigError("posenc: scale must be positive");
  const int rows = static_cast<int>(x.rows());
  constexpr int kOctaves = 10;
  Tensor out(rows, 3 * 2 * kOctaves);
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < kOctaves; ++k) {
      const double w = std::ldexp(kPi, k) / scale;  // 2^k pi / scale
      const int base = (c * kOctaves + k) * 2;
      out.col(base) = (x.col(c) * w).array().sin().matrix();
      out.col(base + 1) = (x.col(c) * w).array().cos().matrix();
    }
  }
  return push(std::move(out),
              [xyz, scale, self = size()](Tape& t, const Tensor& g) {
                const Tensor& x = t.tensor_of(xyz);
                const Tensor& y = t.nodes_[self].value;
                Tensor d = Tensor::Zero(x.rows(), 3);
                for (int c = 0; c < 3; ++c) {
                  for (int k = 0; k < kOctaves; ++k) {
                    const double w = std::ldexp(kPi, k) / scale;
                    const int base = (c * kOctaves + k) * 2;
                    // d/dx sin(wx) = w cos(wx); d/dx cos(wx) = -w sin(wx).
                    d.col(c) += w * (g.col(base).cwiseProduct(y.col(base + 1)) -
                                     g.col(base + 1).cwiseProduct(y.col(base)));
                  }
                }
                t.accum_move(xyz, std::move(d));
              });
}

Var Tape::mix_channels(Var channels, Var weights, int n_channels, int len) {
  const Tensor& ch = tensor_of(channels);
  const Tensor& w = tensor_of(weights);
  if (ch.cols() != static_cast<long>(n_channels) * len ||
      w.cols() != n_channels || w.rows() != ch.rows()) {
    throw ConfigError("mix_channels: shape mismatch");
  }
  Tensor out = Tensor::Zero(ch.rows(), len);
  for (int c = 0; c < n_channels; ++c) {
    out += (ch.middleCols(static_cast<long>(c) * len, len).array().colwise() *
            w.col(c).array())
               .matrix();
  }
  return push(std::move(out), [channels, weights, n_channels,
                               len](Tape& t, const Tensor& g) {
    const Tensor& ch = t.tensor_of(channels);
    const Tensor& w = t.tensor_of(weights);
    Tensor dch(ch.rows(), ch.cols());
    Tensor dw(w.rows(), w.cols());
    for (int c = 0; c < n_channels; ++c) {
      dch.middleCols(static_cast<long>(c) * len, len) =
          (g.array().colwise() * w.col(c).array()).matrix();
      dw.col(c) = g.cwiseProduct(ch.middleCols(static_cast<long>(c) * len, len))
                      .rowwise()
                      .sum();
    }
    t.accum_move(channels, std::move(dch));
    t.accum_move(weights, std::move(dw));
  });
}

void Tape::keep(Var v) { nodes_.at(v.id).kept = true; }

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.has_grad) return n.grad;
  const Tensor& val = n.shared ? *n.shared : n.value;
  return Tensor::Zero(val.rows(), val.cols());
}

void Tape::backward(Var loss) {
  const Tensor& lv = tensor_of(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ConfigError("backward: loss must be scalar (1x1)");
  }
  Tensor seed(1, 1);
  seed(0, 0) = 1.0;
  std::pair<Var, Tensor> s{loss, seed};
  backward_multi({&s, 1});
}

void Tape::backward_multi(std::span<const std::pair<Var, Tensor>> seeds) {
  int top = -1;
  for (const auto& [v, g] : seeds) {
    const Tensor& val = tensor_of(v);
    if (val.rows() != g.rows() || val.cols() != g.cols()) {
      throw ConfigError("backward_multi: seed shape mismatch");
    }
    accum(v, g);
    top = std::max(top, v.id);
  }
  sweep(top);
}

void Tape::sweep(int from) {
  for (int i = from; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.has_grad && n.backprop) {
      n.backprop(*this, n.grad);
    }
    if (!n.is_leaf && !n.kept) {
      // Consumers (higher ids) have already run; this node's value and
      // gradient are no longer needed.
      n.value.resize(0, 0);
      n.grad.resize(0, 0);
      n.has_grad = false;
      n.released = true;
    }
  }
}

}  // namespace ams::ad
