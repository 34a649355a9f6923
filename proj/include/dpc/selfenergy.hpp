#pragma once

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dpc {

struct PhysicalConstants {
  double G = 6.674e-11;     // m^3 kg^-1 s^-2
  double hbar = 1.0546e-34; // J s

  // Throws DomainError unless both constants are strictly positive.
  void validate() const;
};

inline constexpr double kPenroseGamma = 0.039788735772973836;  // 1/(8 pi)
inline constexpr double kNeverCollapses = std::numeric_limits<double>::infinity();

// A rigid body of uniform density, represented by its equivalent sphere.
// `shape_correction` multiplies the sphere self-energy; it stays 1.0 unless a
// caller has an independent estimate for a non-spherical body.
struct MassBody {
  double mass = 0.0;    // kg
  double radius = 0.0;  // m
  std::string label;
  double shape_correction = 1.0;

  void validate() const;
};

// Radius of the sphere holding `mass` at uniform `density`.
double equivalent_sphere_radius(double mass, double density);

// Sphere of equal mass and equal volume for an arbitrary body.
MassBody equivalent_sphere(double mass, double volume, std::string label);

struct SuperpositionGeometry {
  MassBody body;
  double displacement = 0.0;  // m, centre-to-centre between the two branches

  double lambda() const;
  void validate() const;
};

enum class OverlapVariant {
  PaperPrinted,         // cubic coefficient 5/3, discontinuous at lambda = 1
  ContinuityCorrected,  // cubic coefficient 5/4, matches the separated form
};

const char* to_string(OverlapVariant v);
OverlapVariant overlap_variant_from_string(const std::string& s);

double lambda_ratio(double displacement, double radius);

// 6 G M^2 / (5 R): twice the self-energy of a uniform sphere, the lambda -> inf
// asymptote of E_g.
double self_energy_scale(const MassBody& body, const PhysicalConstants& c = {});

// E_g for lambda >= 1 (non-overlapping spheres).
double self_energy_separated(const MassBody& body, double lambda,
                             const PhysicalConstants& c = {});

// E_g for 0 <= lambda <= 1 (overlapping spheres).
double self_energy_overlapping(
    const MassBody& body, double lambda,
    OverlapVariant variant = OverlapVariant::ContinuityCorrected,
    const PhysicalConstants& c = {});

double self_energy(const SuperpositionGeometry& geometry,
                   OverlapVariant variant = OverlapVariant::ContinuityCorrected,
                   const PhysicalConstants& c = {});

// gamma * hbar / E_g; +inf for E_g == 0.
double collapse_time(double energy, double gamma = kPenroseGamma,
                     const PhysicalConstants& c = {});
double collapse_rate(double energy, double gamma = kPenroseGamma,
                     const PhysicalConstants& c = {});

struct MountReaction {
  double mount_displacement = 0.0;  // m
  double mount_energy = 0.0;        // J
};

// Momentum conservation: the mount recoils by (m_mirror / m_mount) of the
// mirror travel.
MountReaction mount_reaction_contribution(
    const MassBody& mirror, double mirror_displacement, const MassBody& mount,
    OverlapVariant variant = OverlapVariant::ContinuityCorrected,
    const PhysicalConstants& c = {});

struct SystemEnergy {
  double energy = 0.0;  // J
  double rate = 0.0;    // 1/s
};

// Sum over disjoint bodies (cross terms between distant bodies neglected)
// plus fixed per-component hazards, e.g. electronics with a known collapse
// time.
SystemEnergy system_self_energy(
    std::span<const SuperpositionGeometry> geometries,
    std::span<const double> extra_component_rates,
    OverlapVariant variant = OverlapVariant::ContinuityCorrected,
    double gamma = kPenroseGamma, const PhysicalConstants& c = {});

}  // namespace dpc
