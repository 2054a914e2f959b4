#pragma once

// Per-axis unitary DFT over a flat row-major buffer, backed by FFTW.

#include <complex>
#include <span>

#include "qsplit/grid.hpp"

namespace qsplit::detail {

enum class Direction { forward, inverse };

/// In-place unitary DFT of every 1-D line along `axis`:
///   forward  F[k] = N^{-1/2} sum_x f[x] exp(-2 pi i k x / N)
///   inverse  f[x] = N^{-1/2} sum_k F[k] exp(+2 pi i k x / N)
void fourier_along_axis(std::span<std::complex<double>> data, const GridSpec& grid, int axis,
                        Direction direction);

}  // namespace qsplit::detail
