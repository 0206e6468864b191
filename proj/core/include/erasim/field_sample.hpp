#pragma once

namespace erasim {

// Effective control fields at one instant, in GHz:
//   H(t)/h = -bx * sum_i sx_i - bz * sum_i sz_i - j * sum_<ij> sz_i sz_j
struct FieldSample {
    double bx_ghz = 0.0;
    double bz_ghz = 0.0;
    double j_ghz = 0.0;
};

}  // namespace erasim
