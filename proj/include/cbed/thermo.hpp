#pragma once

#include "cbed/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cbed {

/// Thermodynamics at inverse temperature beta in a uniform field B, natural
/// units. M and chi are per site.
struct ThermoPoint {
  double beta = 0.0;
  double B = 0.0;
  double log_Z = 0.0;
  double Z = 0.0;  // may be inf for very large partition functions; use log_Z
  double F = 0.0;
  double M = 0.0;
  double chi = 0.0;
  std::size_t n_sites = 0;
};

/// log sum_i exp(-beta (E_i - B m_i)), stabilized.
inline double log_partition_function(const std::vector<double>& energies,
                                     const std::vector<int>& two_m, double beta, double B) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (!two_m.empty() && two_m.size() != energies.size())
    throw std::invalid_argument("log_partition_function: labels do not match levels");
  double xmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double m = two_m.empty() ? 0.0 : 0.5 * two_m[i];
    xmax = std::max(xmax, -beta * (energies[i] - B * m));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double m = two_m.empty() ? 0.0 : 0.5 * two_m[i];
    sum += std::exp(-beta * (energies[i] - B * m) - xmax);
  }
  return xmax + std::log(sum);
}

/// Z, F, M and chi from a full spectrum with m labels. M and chi come from
/// the thermal moments of m_tot: M = <m>/N, chi = beta (<m^2> - <m>^2)/N.
inline ThermoPoint thermo_point(const Spectrum& spectrum, double beta, double B, std::size_t n_sites) {
  if (!(beta > 0.0)) throw std::invalid_argument("thermo_point: beta must be positive");
  if (spectrum.two_m.size() != spectrum.eigenvalues.size())
    throw std::invalid_argument("thermo_point: spectrum needs S3 labels");
  if (n_sites == 0) throw std::invalid_argument("thermo_point: no sites");
  ThermoPoint p;
  p.beta = beta;
  p.B = B;
  p.n_sites = n_sites;
  p.log_Z = log_partition_function(spectrum.eigenvalues, spectrum.two_m, beta, B);
  p.Z = std::exp(p.log_Z);
  p.F = -p.log_Z / beta;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    const double m = 0.5 * spectrum.two_m[i];
    const double w = std::exp(-beta * (spectrum.eigenvalues[i] - B * m) - p.log_Z);
    m1 += w * m;
    m2 += w * m * m;
  }
  const double n = static_cast<double>(n_sites);
  p.M = m1 / n;
  p.chi = beta * std::max(0.0, m2 - m1 * m1) / n;
  return p;
}

/// One row of a (beta, B) scan; bound_margin = F(B) + (N/16) B^2 - F(0).
struct ThermoCurveRow {
  ThermoPoint point;
  double bound_margin = 0.0;
};

inline std::vector<ThermoCurveRow> thermo_scan(const Spectrum& spectrum, std::size_t n_sites,
                                               const std::vector<double>& betas,
                                               const std::vector<double>& fields) {
  std::vector<ThermoCurveRow> rows;
  const double n = static_cast<double>(n_sites);
  for (double beta : betas) {
    const double f0 = thermo_point(spectrum, beta, 0.0, n_sites).F;
    for (double B : fields) {
      auto p = thermo_point(spectrum, beta, B, n_sites);
      rows.push_back({p, p.F + n / 16.0 * B * B - f0});
    }
  }
  return rows;
}

}  // namespace cbed
