#pragma once

#include <optional>
#include <string_view>

#include "rsp/group.h"
#include "rsp/protocol.h"

namespace rsp {

enum class Builtin { teleportation_qubit, equatorial_qubit, trivial_1d, qutrit_block };

std::string_view builtin_name(Builtin b);
std::optional<Builtin> builtin_from_name(std::string_view name);

struct BuiltinParams {
  double lambda1 = 0.3;  // qutrit-block: rho_B = diag(lambda1, lambda1, lambda2)
  double lambda2 = 0.4;
  int equatorial_grid = 24;
  int qutrit_grid = 8;          // points per phase for both qutrit phases
  int teleportation_samples = 50;
};

/// Reference protocols:
///  - teleportation-qubit: Bell resource, Pauli corrections, p_m = 1/4,
///    ensemble of points spread over the Bloch sphere;
///  - equatorial-qubit: Bell resource, U = {1, sigma_z}, p = 1/2, great
///    circle ensemble;
///  - trivial-1d: one outcome on a one-dimensional space;
///  - qutrit-block: the Z_2 block construction on
///    rho_B = diag(lambda1, lambda1, lambda2).
/// Throws PreconditionError for invalid qutrit spectra.
Protocol builtin_protocol(Builtin which, const BuiltinParams& params = {});

/// The qutrit construction with its block structure. Outcomes are ordered
/// and labelled as (k, (m_1, m_2)) with k = 1, 2 and m_1 indexing the
/// equatorial block: diag(-1,-1,1), diag(1,1,1), diag(-1,1,1), diag(1,-1,1).
ComposedProtocol qutrit_block(double lambda1, double lambda2, int grid = 8);

/// Points spread over the Bloch sphere (Fibonacci lattice).
std::vector<CVec> bloch_sphere_points(int count);

}  // namespace rsp
