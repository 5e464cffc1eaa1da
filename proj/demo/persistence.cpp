// Persistence or extinction along a shifted family a + c: the squeeze finds
// the positive periodic state exactly when lambda1 < 0.

#include <cmath>
#include <cstdio>

#include "nlkpp/nlkpp.hpp"

using namespace nlkpp;

int main() {
  Problem p;
  p.resolution = 81;
  for (double c : {0.0, -1.0, -1.5, -1.8, -2.5}) {
    p.a = [c](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2.0 * M_PI * t) + c; };
    auto inst = instantiate(p);
    NonlinearFlow flow(inst.f, inst.spec);
    auto eig = principal_spectrum_point(inst.spec);
    auto sol = periodic_solution_squeeze(flow, eig);
    std::printf("c=%5.2f  lambda1=%+.6f  %-12s  periods=%4d  sup u*=%.6f\n", c, eig.lambda1, sol.status.c_str(),
                sol.periods, sol.exists ? sol.u_star.sup_norm() : 0.0);
  }
}
