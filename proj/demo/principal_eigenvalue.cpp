// Principal spectrum point against the dispersal rate for a seasonal bump.
// Prints CSV: D, lambda1, lambda_star, principal.

#include <cmath>
#include <iostream>

#include "nlkpp/nlkpp.hpp"

using namespace nlkpp;

int main() {
  Problem p;
  p.resolution = 101;
  p.a = [](double t, const Point& x) { return 2.0 - x.x * x.x + 0.5 * std::sin(2.0 * M_PI * t); };
  auto r = sweep_dispersal_rate(p, {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0});
  CsvWriter w({"D", "lambda1", "lambda_star", "principal"});
  for (const auto& rec : r.records) w.row({rec.value, rec.lambda1, rec.lambda_star, rec.is_principal});
  w.write(std::cout);
}
