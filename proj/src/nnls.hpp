#pragma once

#include "lyacert/matrix_kernel.hpp"

namespace lyacert::detail {

struct NnlsResult {
  Vector x;
  double residual = 0.0;  // ||G x - b||_2
};

/// Lawson-Hanson active set solver for min ||G x - b|| subject to x >= 0.
NnlsResult nnls(const Matrix& g, const Vector& b);

}  // namespace lyacert::detail
