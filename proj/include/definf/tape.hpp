#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "definf/mat.hpp"

namespace definf {

// A named trainable tensor with its gradient accumulator.
struct ParamTensor {
  std::string name;
  Mat value;
  Mat grad;

  explicit ParamTensor(std::string n, Mat v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
};

// Insertion-ordered collection of uniquely named parameters. The order is
// the initialization and serialization order, so it is part of the
// determinism contract.
class ParamRegistry {
 public:
  ParamTensor& add(const std::string& name, Mat init);
  ParamTensor& at(const std::string& name);
  const ParamTensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  void zero_grad();
  std::size_t scalar_count() const;
  double grad_norm() const;  // global L2 norm over all gradients
  // Scales every gradient so the global norm is at most max_norm; returns
  // the post-clip norm.
  double clip_grad_norm(double max_norm);

  std::vector<ParamTensor>& tensors() { return params_; }
  const std::vector<ParamTensor>& tensors() const { return params_; }

 private:
  std::vector<ParamTensor> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reverse-mode tape over a fixed op set: linear, relu, softmax, cross
// entropy, elementwise add/scale, matrix-vector product, concat, mean,
// convex mix, dot-product scores and dropout. Build the forward pass with
// the op methods, then call backward(loss) once; parameter gradients
// accumulate into the bound ParamTensors.
class Tape {
 public:
  using Id = int;

  // Constant leaf; never receives gradient.
  Id input(Mat value);
  // Differentiable leaf bound to a registry tensor.
  Id param(ParamTensor& p);

  Id add(Id a, Id b);
  Id scale(Id x, double k);
  Id matvec(Id W, Id x);
  Id linear(Id W, Id x, Id b) { return add(matvec(W, x), b); }
  Id relu(Id x);
  Id softmax(Id z);                     // column vector -> simplex
  Id cross_entropy(Id probs, int gold); // -log probs[gold], 1x1
  Id softmax_xent(Id logits, int gold); // fused, backward is p - onehot
  Id concat(const std::vector<Id>& xs); // stack column vectors
  Id mean(const std::vector<Id>& xs);   // elementwise mean of same-shape vectors
  // sum_i w[i] * xs[i]; w is a column vector of length xs.size().
  Id mix(Id w, const std::vector<Id>& xs);
  // Vector of scale * dot(q, key_i).
  Id dot_scores(Id q, const std::vector<Id>& keys, double scale);
  // Inverted dropout; draws one mask from rng per call.
  Id dropout(Id x, double rate, std::mt19937_64& rng);

  const Mat& value(Id id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Mat& grad(Id id) const { return nodes_[static_cast<size_t>(id)].grad; }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. `loss` must
  // be scalar and finite.
  void backward(Id loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    ParamTensor* bound = nullptr;
    std::function<void(Tape&, Node&)> backprop;  // accumulates into inputs
  };

  Id push(Node n);
  Node& node(Id id) { return nodes_[static_cast<size_t>(id)]; }

  std::vector<Node> nodes_;
};

}  // namespace definf
