#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ladderkit/complexity.hpp"

namespace ladderkit {

Dct2d::Dct2d(int size) : size_(size) {
  if (size < 1) throw std::invalid_argument("DCT size must be positive");
  const std::size_t w = static_cast<std::size_t>(size);
  basis_.resize(w * w);
  for (std::size_t k = 0; k < w; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / size) : std::sqrt(2.0 / size);
    for (std::size_t n = 0; n < w; ++n) {
      basis_[k * w + n] =
          scale * std::cos(std::numbers::pi * (2.0 * n + 1.0) * static_cast<double>(k) / (2.0 * size));
    }
  }
}

void Dct2d::forward(std::span<const double> in, std::span<double> out) const {
  std::vector<double> scratch(in.size());
  forward(in, out, scratch);
}

void Dct2d::forward(std::span<const double> in, std::span<double> out,
                    std::span<double> scratch) const {
  const std::size_t w = static_cast<std::size_t>(size_);
  if (in.size() != w * w || out.size() != w * w || scratch.size() != w * w) {
    throw std::invalid_argument("DCT input/output must hold w*w samples");
  }
  // Rows: scratch[r][k] = sum_n in[r][n] * basis[k][n]
  for (std::size_t r = 0; r < w; ++r) {
    const double* src = in.data() + r * w;
    double* dst = scratch.data() + r * w;
    for (std::size_t k = 0; k < w; ++k) {
      const double* b = basis_.data() + k * w;
      double acc = 0.0;
      for (std::size_t n = 0; n < w; ++n) acc += src[n] * b[n];
      dst[k] = acc;
    }
  }
  // Columns: out[k][c] = sum_r basis[k][r] * scratch[r][c]
  for (std::size_t k = 0; k < w; ++k) {
    double* dst = out.data() + k * w;
    std::fill(dst, dst + w, 0.0);
    const double* b = basis_.data() + k * w;
    for (std::size_t r = 0; r < w; ++r) {
      const double coef = b[r];
      const double* src = scratch.data() + r * w;
      for (std::size_t c = 0; c < w; ++c) dst[c] += coef * src[c];
    }
  }
}

std::vector<double> dct2d(std::span<const double> block, int w) {
  std::vector<double> out(static_cast<std::size_t>(w) * w);
  Dct2d(w).forward(block, out);
  return out;
}

double block_texture_energy(std::span<const double> coefficients, int w) {
  const std::size_t n = static_cast<std::size_t>(w);
  if (coefficients.size() != n * n) throw std::invalid_argument("coefficient block must be w*w");
  const double w2 = static_cast<double>(w) * w;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == 0 && j == 0) continue;
      const double ratio = static_cast<double>(i * j) / w2;
      sum += std::exp(std::abs(ratio * ratio - 1.0)) * std::abs(coefficients[i * n + j]);
    }
  }
  return sum / w2;
}

}  // namespace ladderkit
