#pragma once

// Locally finite Poisson configurations on a window, and their exact
// Radon-Nikodym product under a compactly supported diffeomorphism:
//
//     d(mu_phi)/d(mu) (gamma) = prod_{x in gamma} J_phi(x),
//
// where all but the finitely many factors inside supp(phi) are exactly 1
// and are skipped.  The window is the desk-scale surrogate for the
// infinite-volume measure: any window containing supp(phi) exercises the
// full quasiinvariance behavior.

#include "selfsim/common.hpp"
#include "selfsim/configspace.hpp"
#include "selfsim/diffeo.hpp"
#include "selfsim/rng.hpp"

namespace selfsim {

struct PoissonSpec {
  double intensity = 1.0;  // mean points per unit volume
  Box window;

  void validate() const {
    if (!(intensity > 0.0))
      throw std::invalid_argument("intensity must be positive");
    if (window.dim() < 1 || !(window.volume() > 0.0))
      throw std::invalid_argument("window must have positive volume");
  }
};

/// N ~ Poisson(intensity * volume), points i.i.d. uniform in the window.
Config sample_poisson(const PoissonSpec& spec, RngStream& rng);

/// Finite product of Jacobians over the points inside supp(phi); factors
/// outside are 1 exactly and never touched.
double poisson_rn(const Diffeo& phi, const Config& gamma);

}  // namespace selfsim
