#include "manhattan_lab/su2.hpp"

#include <cmath>

namespace mlab {

Eigen::Matrix2cd haar_su2(RandomStream& stream) {
  for (;;) {
    const auto [a, b] = stream.normal_pair();
    const auto [c, d] = stream.normal_pair();
    const double norm = std::sqrt(a * a + b * b + c * c + d * d);
    if (norm == 0.0) continue;
    using C = std::complex<double>;
    Eigen::Matrix2cd u;
    u << C(a, b), C(c, d),
         C(-c, d), C(a, -b);
    return u / norm;
  }
}

}  // namespace mlab
