// When lambda1 < 0 the maximum principle fails: build a witness that meets
// every hypothesis yet is negative inside, and check it independently.

#include <cmath>
#include <cstdio>

#include "nlkpp/nlkpp.hpp"

using namespace nlkpp;

int main() {
  Problem p;
  p.resolution = 61;
  p.time_samples = 128;
  p.a = [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2.0 * M_PI * t); };
  auto spec = instantiate(p).spec;
  auto ce = counterexample_construct(spec);
  if (!ce.found) {
    std::printf("no witness: %s\n", ce.diagnostic.c_str());
    return 1;
  }
  auto v = verify_instance(spec, ce.witness);
  std::printf("lambda1 = %.6f, cutoff rho = %.4f\n", ce.lambda1, ce.rho);
  std::printf("supersolution %d  boundary %d  initial %d  ->  conclusion %d\n", v.supersolution, v.boundary,
              v.initial, v.conclusion);
  std::printf("worst L[u] = %.3e (<= slack %.0e), min interior u = %.4f\n", v.worst_L, v.slack, v.min_interior);
  return v.violates() ? 0 : 1;
}
