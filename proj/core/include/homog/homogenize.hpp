#pragma once

#include <complex>
#include <span>

#include "homog/corrector.hpp"
#include "homog/model.hpp"
#include "homog/triplet.hpp"

namespace homog {

struct HomogenizeOptions {
  int u_nodes = 64;        // torus midpoint rule for the u integral
  int angular_nodes = 32;  // kappa_bar directions (d = 2)
};

/// kappa_bar(z) = int_Td int_Td kappa0(x,z,u) du mu(dx) by double quadrature.
double homogenized_kappa(const JumpKernel& kernel, const EmpiricalMeasure& mu,
                         std::span<const double> z, const HomogenizeOptions& opts = {});

/// Tabulates kappa_bar over the directions of the angular grid.
KappaBarTable homogenized_kappa_table(const JumpKernel& kernel, const LevyDensity& J,
                                      const EmpiricalMeasure& mu,
                                      const HomogenizeOptions& opts = {});

/// Assembles the full homogenized triplet (b_bar, 0, nu_bar). For
/// alpha in (1,2) the corrector gradient enters c_bar; passing nullptr with a
/// nonzero b is an error. For alpha = 1 the spherical centering assumption
/// zeroes the drift.
HomogenizedTriplet homogenize(const ModelSpec& model, const EmpiricalMeasure& mu,
                              const Corrector* corrector, const HomogenizeOptions& opts = {});

struct ExponentQuad {
  double r_inner = 1e-2;
  int nodes_per_decade = 256;
  double r_cap = 1e4;
};

/// int_0^inf (e^{irs} - 1 - irs 1_{r < comp_cutoff}) r^{-1-alpha} dr with an
/// inner Taylor band, an oscillation-resolved midpoint band and a two-term
/// integration-by-parts tail. comp_cutoff = +inf compensates everywhere
/// (the cell-generator convention), 1.0 the unit-ball truncation, 0 none.
std::complex<double> stable_radial_integral(double alpha, double s, double comp_cutoff,
                                            const ExponentQuad& quad = {});

/// Levy-Khintchine exponent of the triplet relative to the unit-ball
/// truncation: psi(xi) = i b_bar.xi + int (e^{i xi.z} - 1 - i xi.z 1_B) nu_bar(dz).
std::complex<double> levy_exponent(const HomogenizedTriplet& triplet, std::span<const double> xi,
                                   const ExponentQuad& quad = {});

}  // namespace homog
