#pragma once

#include <vector>

#include "pba/image.hpp"

namespace pba {

// 2x2 average-pooled chain; levels[0] is the source, each level has
// ceil-half dimensions of the previous. Border cells with fewer than four
// contributors average over the in-bounds ones.
struct Pyramid {
  std::vector<ImageGrid> levels;
};

// Throws InvalidInputError when min(width, height) < 2^(levels-1).
Pyramid build_pyramid(const ImageGrid& img, int levels = 4);

inline int half_dim(int d) { return (d + 1) / 2; }

// 2x2 average pooling of a single-channel row-major buffer. dst must hold
// half_dim(w) * half_dim(h) values.
void avg_pool_half(const double* src, int w, int h, double* dst);

// Transpose of avg_pool_half: distributes each pooled-cell gradient equally
// over its contributors, accumulating into grad_src (same dims as src).
void avg_pool_half_backward(const double* grad_dst, int w, int h, double* grad_src);

// Pooled chain of a single-channel buffer; out[0] is a copy of src.
std::vector<std::vector<double>> pool_chain(const std::vector<double>& src, int w, int h,
                                            int levels);

}  // namespace pba
