#pragma once

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "nlkpp/spectral/principal.hpp"

namespace nlkpp {

struct SpectrumRow {
  double parameter = 0.0;
  double lambda1 = 0.0;
  double lambda_star = 0.0;
  bool is_principal = false;
  double residual = 0.0;
  int iterations = 0;
};

inline SpectrumRow spectrum_row(double parameter, const EigenResult& r) {
  return {parameter, r.lambda1, r.lambda_star, r.is_principal, r.residual, r.iterations};
}

inline void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumRow>& rows,
                               const std::string& parameter_name = "parameter") {
  os << parameter_name << ",lambda1,lambda_star,is_principal,residual,iterations\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.parameter << ',' << r.lambda1 << ',' << r.lambda_star << ','
       << (r.is_principal ? "true" : "false") << ',' << r.residual << ',' << r.iterations << '\n';
}

}  // namespace nlkpp
