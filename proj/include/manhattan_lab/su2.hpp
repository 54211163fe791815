#pragma once

#include <Eigen/Dense>

#include "manhattan_lab/rng.hpp"

namespace mlab {

/// Haar-distributed SU(2) element: a Gaussian quaternion (a, b, c, d),
/// normalized, mapped to [[a+ib, c+id], [-c+id, a-ib]].
Eigen::Matrix2cd haar_su2(RandomStream& stream);

}  // namespace mlab
