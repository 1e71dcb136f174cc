#include "escape4d/rng.hpp"

#include <cmath>

namespace escape4d {

double Rng::normal() {
    double u1 = 1.0 - u01();  // (0, 1], keeps the log finite
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace escape4d
