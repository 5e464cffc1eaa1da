#pragma once
// Umbrella header: the whole library.

#include "nlkpp/core/coefficient.hpp"
#include "nlkpp/core/error.hpp"
#include "nlkpp/core/expression.hpp"
#include "nlkpp/core/field.hpp"
#include "nlkpp/core/grid.hpp"
#include "nlkpp/core/hypotheses.hpp"
#include "nlkpp/core/kernel.hpp"
#include "nlkpp/core/nonlinearity.hpp"
#include "nlkpp/core/parallel.hpp"
#include "nlkpp/core/quadrature.hpp"
#include "nlkpp/nonlocal/consistency.hpp"
#include "nlkpp/nonlocal/dispersal.hpp"
#include "nlkpp/nonlocal/resolvent.hpp"
#include "nlkpp/spectral/certificates.hpp"
#include "nlkpp/spectral/existence.hpp"
#include "nlkpp/spectral/monodromy.hpp"
#include "nlkpp/spectral/principal.hpp"
#include "nlkpp/spectral/report.hpp"
#include "nlkpp/spectral/stationary.hpp"
#include "nlkpp/dynamics/evolution.hpp"
#include "nlkpp/dynamics/periodic.hpp"
#include "nlkpp/dynamics/scalar.hpp"
#include "nlkpp/asymptotics/limits.hpp"
#include "nlkpp/asymptotics/problem.hpp"
#include "nlkpp/asymptotics/sweeps.hpp"
#include "nlkpp/maxprin/maxprin.hpp"
#include "nlkpp/io/config.hpp"
#include "nlkpp/io/csv.hpp"
