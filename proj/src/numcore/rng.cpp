#include "hoidist/numcore/rng.hpp"

#include <cmath>

namespace numcore {

double Rng::gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0)
        u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace numcore
