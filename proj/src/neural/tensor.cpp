#include "fexp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "fexp/error.hpp"

namespace fexp {

namespace {
std::size_t volume(const std::vector<std::size_t>& shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)), data_(volume(shape_), 0.0)
{
  if (shape_.empty() || shape_.size() > 2) fail(ErrorKind::Usage, "tensors are rank 1 or 2");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
  if (shape_.empty() || shape_.size() > 2) fail(ErrorKind::Usage, "tensors are rank 1 or 2");
  if (data_.size() != volume(shape_)) fail(ErrorKind::Schema, "tensor data length does not match its shape");
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const
{
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> values, std::string_view what)
{
  for (double v : values)
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "non-finite value in " + std::string(what));
}

namespace la {

void matvec_add(const Tensor& w, std::span<const double> x, std::span<double> out)
{
  const std::size_t n = w.cols();
  const double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += n) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += p[c] * x[c];
    out[r] += acc;
  }
}

void matvec_t_add(const Tensor& w, std::span<const double> y, std::span<double> out)
{
  const std::size_t n = w.cols();
  const double* p = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r, p += n) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < n; ++c) out[c] += p[c] * yr;
  }
}

void outer_add(Tensor& dw, std::span<const double> y, std::span<const double> x)
{
  const std::size_t n = dw.cols();
  double* p = dw.data().data();
  for (std::size_t r = 0; r < dw.rows(); ++r, p += n) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < n; ++c) p[c] += yr * x[c];
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y)
{
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double dot(std::span<const double> a, std::span<const double> b)
{
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sigmoid(double x)
{
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace la

}  // namespace fexp
