#pragma once

#include <vector>

namespace monodromize {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Nodes by Newton iteration on P_n; rules are memoised per n.
const GaussRule& gauss_legendre(int n);

}  // namespace monodromize
