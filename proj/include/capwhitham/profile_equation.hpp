#pragma once

// Residual of the traveling-wave profile equation, evaluated with the plain
// multiplier and pointwise products only.

#include <algorithm>
#include <cmath>

#include "capwhitham/dispersion.hpp"
#include "capwhitham/spectral_field.hpp"

namespace capwhitham {

enum class Variables { Physical, Scaled };

/// Relative residual of the profile equation for a field whose spectrum is
/// representable on its grid:
///   Physical: ||(M - c) w + w^2||_inf / ||w||_inf
///   Scaled:   ||L_eps W + W^2||_inf / ||W||_inf   (scaled equation divided by eps^2)
inline double full_residual(const BondParams& params, const ScalingParams& scaling, const SpectralField& w,
                            Variables vars = Variables::Scaled) {
  const double norm = w.sup_norm();
  if (norm == 0.0) return 0.0;
  const auto lin = vars == Variables::Scaled
                       ? apply_multiplier(w, [&](double K) { return l_eps(params, scaling, K); })
                       : apply_multiplier(w, [&](double k) { return m_beta(params, k) - scaling.c(); });
  double worst = 0.0;
  for (int n = 0; n < w.size(); ++n) worst = std::max(worst, std::abs(lin[n] + w[n] * w[n]));
  return worst / norm;
}

}  // namespace capwhitham
