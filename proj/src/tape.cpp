#include "definf/tape.hpp"

#include <algorithm>
#include <cmath>

namespace definf {

ParamTensor& ParamRegistry::add(const std::string& name, Mat init) {
  if (index_.contains(name)) throw Error("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  params_.emplace_back(name, std::move(init));
  return params_.back();
}

ParamTensor& ParamRegistry::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return params_[it->second];
}

const ParamTensor& ParamRegistry::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter: " + name);
  return params_[it->second];
}

void ParamRegistry::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.a.begin(), p.grad.a.end(), 0.0);
}

std::size_t ParamRegistry::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.a.size();
  return n;
}

double ParamRegistry::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (double g : p.grad.a) sq += g * g;
  }
  return std::sqrt(sq);
}

double ParamRegistry::clip_grad_norm(double max_norm) {
  double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    double s = max_norm / norm;
    for (auto& p : params_) {
      for (double& g : p.grad.a) g *= s;
    }
    return max_norm;
  }
  return norm;
}

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::input(Mat value) {
  Node n;
  n.grad = Mat(value.rows, value.cols);
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::Id Tape::param(ParamTensor& p) {
  Node n;
  n.value = p.value;
  n.grad = Mat(p.value.rows, p.value.cols);
  n.needs_grad = true;
  n.bound = &p;
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (!va.same_shape(vb)) throw ShapeError("add: shapes differ");
  Node n;
  n.value = va;
  for (size_t i = 0; i < n.value.a.size(); ++i) n.value.a[i] += vb.a[i];
  n.grad = Mat(va.rows, va.cols);
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.backprop = [a, b](Tape& t, Node& self) {
    for (size_t i = 0; i < self.grad.a.size(); ++i) {
      t.node(a).grad.a[i] += self.grad.a[i];
      t.node(b).grad.a[i] += self.grad.a[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::scale(Id x, double k) {
  Node n;
  n.value = value(x);
  for (double& v : n.value.a) v *= k;
  n.grad = Mat(n.value.rows, n.value.cols);
  n.needs_grad = node(x).needs_grad;
  n.backprop = [x, k](Tape& t, Node& self) {
    for (size_t i = 0; i < self.grad.a.size(); ++i) {
      t.node(x).grad.a[i] += k * self.grad.a[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::matvec(Id W, Id x) {
  const Mat& w = value(W);
  const Mat& v = value(x);
  Node n;
  n.value = definf::matvec(w, v);
  n.grad = Mat(n.value.rows, 1);
  n.needs_grad = node(W).needs_grad || node(x).needs_grad;
  n.backprop = [W, x](Tape& t, Node& self) {
    const Mat& w = t.value(W);
    const Mat& v = t.value(x);
    Mat& gw = t.node(W).grad;
    Mat& gx = t.node(x).grad;
    for (int r = 0; r < w.rows; ++r) {
      const double gr = self.grad[static_cast<size_t>(r)];
      for (int c = 0; c < w.cols; ++c) {
        gw(r, c) += gr * v[static_cast<size_t>(c)];
        gx[static_cast<size_t>(c)] += gr * w(r, c);
      }
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::relu(Id x) {
  Node n;
  n.value = value(x);
  for (double& v : n.value.a) v = v > 0.0 ? v : 0.0;
  n.grad = Mat(n.value.rows, n.value.cols);
  n.needs_grad = node(x).needs_grad;
  n.backprop = [x](Tape& t, Node& self) {
    const Mat& in = t.value(x);
    for (size_t i = 0; i < self.grad.a.size(); ++i) {
      if (in.a[i] > 0.0) t.node(x).grad.a[i] += self.grad.a[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::softmax(Id z) {
  const Mat& in = value(z);
  if (!in.is_vector()) throw ShapeError("softmax expects a column vector");
  for (double v : in.a) {
    if (!std::isfinite(v)) throw NonFiniteError("softmax input not finite");
  }
  Node n;
  n.value = Mat(in.rows, 1);
  double m = *std::max_element(in.a.begin(), in.a.end());
  double sum = 0.0;
  for (size_t i = 0; i < in.a.size(); ++i) {
    n.value.a[i] = std::exp(in.a[i] - m);
    sum += n.value.a[i];
  }
  for (double& v : n.value.a) v /= sum;
  n.grad = Mat(in.rows, 1);
  n.needs_grad = node(z).needs_grad;
  n.backprop = [z](Tape& t, Node& self) {
    double dot = 0.0;
    for (size_t i = 0; i < self.grad.a.size(); ++i) dot += self.grad.a[i] * self.value.a[i];
    for (size_t i = 0; i < self.grad.a.size(); ++i) {
      t.node(z).grad.a[i] += self.value.a[i] * (self.grad.a[i] - dot);
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::cross_entropy(Id probs, int gold) {
  const Mat& p = value(probs);
  if (!p.is_vector() || gold < 0 || gold >= p.rows) {
    throw ShapeError("cross_entropy: bad gold index " + std::to_string(gold));
  }
  const double pg = p[static_cast<size_t>(gold)];
  if (!(pg > 0.0)) throw NonFiniteError("cross_entropy of nonpositive probability");
  Node n;
  n.value = Mat(1, 1);
  n.value[0] = -std::log(pg);
  n.grad = Mat(1, 1);
  n.needs_grad = node(probs).needs_grad;
  n.backprop = [probs, gold, pg](Tape& t, Node& self) {
    t.node(probs).grad[static_cast<size_t>(gold)] += -self.grad[0] / pg;
  };
  return push(std::move(n));
}

Tape::Id Tape::softmax_xent(Id logits, int gold) {
  const Mat& z = value(logits);
  if (!z.is_vector() || gold < 0 || gold >= z.rows) {
    throw ShapeError("softmax_xent: bad gold index " + std::to_string(gold));
  }
  for (double v : z.a) {
    if (!std::isfinite(v)) throw NonFiniteError("softmax_xent input not finite");
  }
  double m = *std::max_element(z.a.begin(), z.a.end());
  double sum = 0.0;
  std::vector<double> p(z.a.size());
  for (size_t i = 0; i < z.a.size(); ++i) {
    p[i] = std::exp(z.a[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  Node n;
  n.value = Mat(1, 1);
  n.value[0] = -(z[static_cast<size_t>(gold)] - m - std::log(sum));
  n.grad = Mat(1, 1);
  n.needs_grad = node(logits).needs_grad;
  n.backprop = [logits, gold, p](Tape& t, Node& self) {
    Mat& gz = t.node(logits).grad;
    for (size_t i = 0; i < p.size(); ++i) {
      double onehot = static_cast<int>(i) == gold ? 1.0 : 0.0;
      gz.a[i] += self.grad[0] * (p[i] - onehot);
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::concat(const std::vector<Id>& xs) {
  if (xs.empty()) throw ShapeError("concat of nothing");
  int total = 0;
  bool needs = false;
  for (Id x : xs) {
    if (!value(x).is_vector()) throw ShapeError("concat expects column vectors");
    total += value(x).rows;
    needs = needs || node(x).needs_grad;
  }
  Node n;
  n.value = Mat(total, 1);
  int off = 0;
  for (Id x : xs) {
    const Mat& v = value(x);
    for (int i = 0; i < v.rows; ++i) n.value[static_cast<size_t>(off + i)] = v[static_cast<size_t>(i)];
    off += v.rows;
  }
  n.grad = Mat(total, 1);
  n.needs_grad = needs;
  n.backprop = [xs](Tape& t, Node& self) {
    int off = 0;
    for (Id x : xs) {
      Mat& gx = t.node(x).grad;
      for (int i = 0; i < gx.rows; ++i) {
        gx[static_cast<size_t>(i)] += self.grad[static_cast<size_t>(off + i)];
      }
      off += gx.rows;
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::mean(const std::vector<Id>& xs) {
  if (xs.empty()) throw ShapeError("mean of nothing");
  const Mat& first = value(xs.front());
  Node n;
  n.value = Mat(first.rows, first.cols);
  bool needs = false;
  for (Id x : xs) {
    if (!value(x).same_shape(first)) throw ShapeError("mean: shapes differ");
    for (size_t i = 0; i < n.value.a.size(); ++i) n.value.a[i] += value(x).a[i];
    needs = needs || node(x).needs_grad;
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (double& v : n.value.a) v *= inv;
  n.grad = Mat(first.rows, first.cols);
  n.needs_grad = needs;
  n.backprop = [xs, inv](Tape& t, Node& self) {
    for (Id x : xs) {
      Mat& gx = t.node(x).grad;
      for (size_t i = 0; i < gx.a.size(); ++i) gx.a[i] += inv * self.grad.a[i];
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::mix(Id w, const std::vector<Id>& xs) {
  const Mat& wv = value(w);
  if (xs.empty()) throw ShapeError("mix of nothing");
  if (!wv.is_vector() || wv.rows != static_cast<int>(xs.size())) {
    throw ShapeError("mix: weight length " + std::to_string(wv.rows) + " vs " +
                     std::to_string(xs.size()) + " terms");
  }
  const Mat& first = value(xs.front());
  Node n;
  n.value = Mat(first.rows, first.cols);
  bool needs = node(w).needs_grad;
  for (size_t k = 0; k < xs.size(); ++k) {
    const Mat& xv = value(xs[k]);
    if (!xv.same_shape(first)) throw ShapeError("mix: term shapes differ");
    for (size_t i = 0; i < n.value.a.size(); ++i) n.value.a[i] += wv[k] * xv.a[i];
    needs = needs || node(xs[k]).needs_grad;
  }
  n.grad = Mat(first.rows, first.cols);
  n.needs_grad = needs;
  n.backprop = [w, xs](Tape& t, Node& self) {
    Mat& gw = t.node(w).grad;
    const Mat& wv = t.value(w);
    for (size_t k = 0; k < xs.size(); ++k) {
      const Mat& xv = t.value(xs[k]);
      Mat& gx = t.node(xs[k]).grad;
      double dot = 0.0;
      for (size_t i = 0; i < self.grad.a.size(); ++i) {
        dot += self.grad.a[i] * xv.a[i];
        gx.a[i] += wv[k] * self.grad.a[i];
      }
      gw[k] += dot;
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::dot_scores(Id q, const std::vector<Id>& keys, double scale) {
  const Mat& qv = value(q);
  if (!qv.is_vector()) throw ShapeError("dot_scores expects a vector query");
  Node n;
  n.value = Mat(static_cast<int>(keys.size()), 1);
  bool needs = node(q).needs_grad;
  for (size_t k = 0; k < keys.size(); ++k) {
    const Mat& kv = value(keys[k]);
    if (!kv.same_shape(qv)) throw ShapeError("dot_scores: key shape differs from query");
    double dot = 0.0;
    for (size_t i = 0; i < qv.a.size(); ++i) dot += qv.a[i] * kv.a[i];
    n.value[k] = scale * dot;
    needs = needs || node(keys[k]).needs_grad;
  }
  n.grad = Mat(static_cast<int>(keys.size()), 1);
  n.needs_grad = needs;
  n.backprop = [q, keys, scale](Tape& t, Node& self) {
    const Mat& qv = t.value(q);
    Mat& gq = t.node(q).grad;
    for (size_t k = 0; k < keys.size(); ++k) {
      const double gk = scale * self.grad[k];
      const Mat& kv = t.value(keys[k]);
      Mat& gkey = t.node(keys[k]).grad;
      for (size_t i = 0; i < qv.a.size(); ++i) {
        gq.a[i] += gk * kv.a[i];
        gkey.a[i] += gk * qv.a[i];
      }
    }
  };
  return push(std::move(n));
}

Tape::Id Tape::dropout(Id x, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw Error("dropout rate must be < 1");
  const Mat& in = value(x);
  const double keep = 1.0 - rate;
  std::vector<double> mask(in.a.size());
  for (double& m : mask) {
    // Engine output mapped to [0,1) without std::uniform_real_distribution,
    // which is implementation-defined.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    m = u < keep ? 1.0 / keep : 0.0;
  }
  Node n;
  n.value = Mat(in.rows, in.cols);
  for (size_t i = 0; i < in.a.size(); ++i) n.value.a[i] = in.a[i] * mask[i];
  n.grad = Mat(in.rows, in.cols);
  n.needs_grad = node(x).needs_grad;
  n.backprop = [x, mask](Tape& t, Node& self) {
    Mat& gx = t.node(x).grad;
    for (size_t i = 0; i < gx.a.size(); ++i) gx.a[i] += mask[i] * self.grad.a[i];
  };
  return push(std::move(n));
}

void Tape::backward(Id loss) {
  Node& l = node(loss);
  if (l.value.size() != 1) throw ShapeError("backward expects a scalar loss");
  if (!std::isfinite(l.value[0])) throw NonFiniteError("loss is not finite");
  l.grad[0] = 1.0;
  for (Id id = static_cast<Id>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = node(id);
    if (!n.needs_grad) continue;
    if (n.backprop) n.backprop(*this, n);
    if (n.bound) {
      for (size_t i = 0; i < n.grad.a.size(); ++i) n.bound->grad.a[i] += n.grad.a[i];
    }
  }
}

}  // namespace definf
