#pragma once

#include <initializer_list>
#include <vector>

#include "definf/errors.hpp"

namespace definf {

// Dense row-major double matrix; column vectors are (n, 1).
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  static Mat vec(std::vector<double> x) {
    Mat m;
    m.rows = static_cast<int>(x.size());
    m.cols = 1;
    m.a = std::move(x);
    return m;
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double& operator[](size_t i) { return a[i]; }
  double operator[](size_t i) const { return a[i]; }

  int size() const { return rows * cols; }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  bool is_vector() const { return cols == 1; }

  bool operator==(const Mat&) const = default;
};

inline Mat matvec(const Mat& W, const Mat& x) {
  if (x.cols != 1 || W.cols != x.rows) {
    throw ShapeError("matvec shape mismatch: (" + std::to_string(W.rows) + "x" +
                     std::to_string(W.cols) + ") * (" + std::to_string(x.rows) + "x" +
                     std::to_string(x.cols) + ")");
  }
  Mat y(W.rows, 1);
  for (int r = 0; r < W.rows; ++r) {
    double acc = 0.0;
    for (int c = 0; c < W.cols; ++c) acc += W(r, c) * x[static_cast<size_t>(c)];
    y[static_cast<size_t>(r)] = acc;
  }
  return y;
}

}  // namespace definf
