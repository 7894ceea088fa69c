#pragma once

// Level-set functionals of b tabulated against the level value r = b(t).

#include <string>
#include <vector>

#include "greenlab/greens_engine.hpp"

namespace greenlab {

struct LevelSetFunctionals {
  std::vector<double> t;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> b;
  std::vector<double> grad_b;
  std::vector<double> area;
  std::vector<double> A0;
  std::vector<double> A1;
  std::vector<double> B1;
  std::vector<double> B2;
  std::vector<double> S1;
  std::vector<double> a;
  std::vector<double> S;     // scalar curvature on the level
  std::vector<double> B_nn;  // radial component of the trace-free Hessian
  std::vector<double> Vflux;           // filled by v_flux
  std::vector<double> vflux_residual;  // Vflux - (2a + 2)

  double log_step = 0.0;
  bool pole_present = true;
  double A1_formula_residual = 0.0;  // max |r^-2 area |grad b|^2 - 4 pi b^2 / f^2|

  std::size_t size() const { return r.size(); }
};

/// A_beta = r^-2 area |grad b|^(1 + beta) on the grid.
std::vector<double> A_beta(const GreensProfile& profile, double beta);

/// Tabulates A_0, A_1, B_1, B_2, S_1 and a. Runs hessian_b2 if needed,
/// which may throw GridTooCoarse.
LevelSetFunctionals compute_functionals(const GreensProfile& profile);

/// Vflux = B_1 / A_1 and its residual against 2a + 2.
LevelSetFunctionals v_flux(LevelSetFunctionals lf);

/// compute_functionals followed by v_flux.
LevelSetFunctionals functionals_of(const GreensProfile& profile);

enum class CumulativeOf { S1, B2, S1_plus_B2 };

/// int_0^r of the chosen functional in the level variable. The segment
/// below the first grid level uses a power-law fit through the first two
/// points. Throws NotPoleAnchored on profiles without a pole.
std::vector<double> cumulative(const LevelSetFunctionals& lf, CumulativeOf which);

/// d/ds of samples on a uniform grid with spacing h, 4th order everywhere.
std::vector<double> uniform_derivative(const std::vector<double>& y, double h);

/// d/dr of samples on the level grid (chain rule through s = ln t, dr/ds = t |grad b|).
std::vector<double> level_derivative(const LevelSetFunctionals& lf, const std::vector<double>& y);

/// 4th-order cumulative integral of samples on a uniform grid, starting at 0.
std::vector<double> uniform_cumulative(const std::vector<double>& y, double h);

}  // namespace greenlab
