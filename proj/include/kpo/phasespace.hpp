#pragma once

// Husimi functions Q(q,p) = |<alpha|psi>|^2 / pi with alpha = (q + i p)/sqrt(2),
// their inverse participation ratio, and the coherent-state IPR in a Floquet
// basis.

#include "kpo/floquet.hpp"
#include "kpo/fock.hpp"
#include "kpo/hamiltonians.hpp"

namespace kpo {

inline constexpr Index kDefaultHusimiPoints = 201;

struct HusimiField {
  RealVector q_grid;
  RealVector p_grid;
  Eigen::MatrixXd values;  // values(i, j) at (q_grid(i), p_grid(j))
  double cell_area = 0.0;
  double mass = 0.0;       // captured fraction, sum(values) * cell_area / 2
  double max_value = 0.0;
};

/// n points from lo to hi inclusive.
RealVector uniform_grid(double lo, double hi, Index n);

/// max(12, 2 sqrt(2 Gamma) + 4).
double default_half_width(double gamma);

/// Throws DomainTooSmall when less than 99% of the mass lies on the grid.
HusimiField husimi(const StateVector& state, const RealVector& q_grid, const RealVector& p_grid);

/// Square grid of `points` per axis over |q|,|p| <= default_half_width(gamma).
HusimiField husimi_default(const StateVector& state, double gamma,
                           Index points = kDefaultHusimiPoints);

double husimi_ipr(const HusimiField& field);

/// Husimi on the default grid for `gamma`; if that grid loses more than 1% of
/// the weight, on a grid of half-width sqrt(2 dim) + 6 instead.
HusimiField husimi_adaptive(const StateVector& state, double gamma,
                            Index points = kDefaultHusimiPoints);
double husimi_ipr_adaptive(const StateVector& state, double gamma,
                           Index points = kDefaultHusimiPoints);
double husimi_ipr(const StateVector& state, const RealVector& q_grid, const RealVector& p_grid);

/// order 0: vacuum. order 1: exp(-i S1)|0>, where S1 removes the oscillating
/// part of the cubic term at first order (S1 = sum_{k != 0} C3_k / (i k omega_d/2)
/// evaluated at t = 0).
StateVector origin_packet(const HamiltonianSpec& spec, int us_order);

/// sum_j |<phi_j|packet>|^4.
double floquet_basis_ipr(const StateVector& packet, const FloquetSpectrum& spectrum);

/// |<phi_j|packet>|^2 for every mode.
RealVector packet_weights(const StateVector& packet, const FloquetSpectrum& spectrum);

}  // namespace kpo
