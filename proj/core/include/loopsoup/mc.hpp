#pragma once

namespace loopsoup {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  long n = 0;
};

}  // namespace loopsoup
