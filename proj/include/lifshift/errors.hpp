#pragma once

#include <stdexcept>
#include <string>

namespace lifshift {

enum class errc {
  empty_table,
  non_monotonic_energy,
  negative_im_eps,
  nonpositive_frequency,
  nonpositive_xi,
  quadrature_nonconvergent,
  truncation_not_converged,
  separation_nonpositive,
  amplitude_exceeds_separation,
  curve_range_mismatch,
  missing_sigma_z,
  invalid_dof,
  invalid_argument,
  invalid_spec,
  invalid_settings,
  invalid_geometry,
  invalid_dataset,
  invalid_grid,
  parse_error,
  io_error,
};

inline const char* errc_name(errc e)
{
  switch (e) {
    case errc::empty_table: return "EmptyTable";
    case errc::non_monotonic_energy: return "NonMonotonicEnergy";
    case errc::negative_im_eps: return "NegativeImEps";
    case errc::nonpositive_frequency: return "NonpositiveFrequency";
    case errc::nonpositive_xi: return "NonpositiveXi";
    case errc::quadrature_nonconvergent: return "QuadratureNonConvergent";
    case errc::truncation_not_converged: return "TruncationNotConverged";
    case errc::separation_nonpositive: return "SeparationNonpositive";
    case errc::amplitude_exceeds_separation: return "AmplitudeExceedsSeparation";
    case errc::curve_range_mismatch: return "CurveRangeMismatch";
    case errc::missing_sigma_z: return "MissingSigmaZ";
    case errc::invalid_dof: return "InvalidDof";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::invalid_spec: return "InvalidSpec";
    case errc::invalid_settings: return "InvalidSettings";
    case errc::invalid_geometry: return "InvalidGeometry";
    case errc::invalid_dataset: return "InvalidDataset";
    case errc::invalid_grid: return "InvalidGrid";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

// Inputs that fail a precondition or a file/config contract; a CLI maps
// these to exit code 2, everything else (runtime numerics) to exit 3.
inline bool is_input_error(errc e)
{
  switch (e) {
    case errc::quadrature_nonconvergent:
    case errc::truncation_not_converged:
    case errc::curve_range_mismatch:
      return false;
    default:
      return true;
  }
}

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
  {
  }

  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what)
{
  throw error(code, what);
}

} // namespace lifshift
