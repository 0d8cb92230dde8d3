#pragma once

#include "coniso/cmc_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coniso {

// Region bounded by a coordinate slab B_r or by a radial-graph leaf. These are
// the two families the isoperimetric functionals are evaluated on.
struct Region {
    enum class Kind { Slab, Leaf };
    Kind kind = Kind::Slab;
    double r = 0.0;
    std::optional<RadialGraph> graph;

    static Region slab(double radius) { return {Kind::Slab, radius, {}}; }
    static Region leaf(RadialGraph g) { return {Kind::Leaf, 0.0, std::move(g)}; }
};

// perimeter^m / (m^{m-1} omega_{m-1} volume^{m-1}); boundary area from the
// slice or graph geometry, volume from ball_volume or enclosed_volume.
double iso_ratio(const AsymptoticConeMetric& metric, const Region& region);

struct ConeAngleReport {
    double value = 0.0;            // area(L) / omega_{m-1}
    bool ricci_condition = false;  // Ric_L >= (m-2) g_L
    bool bound_satisfied = true;   // value <= 1 whenever the Ricci condition holds
    bool rigidity = false;         // value == 1 within tolerance (unit-sphere link)
};
// Exact isoperimetric cone angle of the cone over the link. When the Ricci
// condition holds the value cannot exceed 1 (area comparison); a violation
// beyond tolerance throws ConsistencyError as a discretization failure.
ConeAngleReport cone_angle(const LinkMetric& link);

// (1/16 pi) integral of H^2 over the region boundary (3-dimensional ambient).
double huisken_functional(const AsymptoticConeMetric& metric, const Region& region);

struct CyReport {
    double value = 0.0;  // integral of H^2 + 2|h|^2 + 2R
    double bound = 0.0;  // 64 pi
    double genus_zero_bound = 0.0;  // 48 pi, applicable to the sphere-topology links here
    bool passes = false;
    bool passes_genus_zero = false;
};
// Stability integral of closed volume-preserving stable CMC surfaces in
// 3-manifolds, with the ambient scalar curvature traced from the
// finite-difference Ricci.
CyReport cy_functional(const AsymptoticConeMetric& metric, const Region& region);

// integral of |h|^2 over the region boundary (3-dimensional ambient);
// reported as a diagnostic trend, no pass/fail.
double h_sq_integral(const AsymptoticConeMetric& metric, const Region& region);

struct IsoReport {
    double ratio = 0.0;
    double cone_angle_exact = 0.0;
    double huisken_value = 0.0;
    double cy_value = 0.0;
    bool cy_passes = false;
    double h_sq_integral = 0.0;
    bool functionals_available = false;  // true when the ambient dimension is 3
};
IsoReport iso_report(const AsymptoticConeMetric& metric, const Region& region);

enum class ProfileVerdict { Confirmed, Inconclusive };

struct LevyGromovRow {
    double beta = 0.0;
    double link_estimate = 0.0;
    double sphere_profile = 0.0;
    ProfileMethod method = ProfileMethod::CapExact;
    bool is_upper_bound = false;
    ProfileVerdict verdict = ProfileVerdict::Inconclusive;
};

struct LevyGromovReport {
    std::vector<LevyGromovRow> rows;
    bool all_confirmed = false;
};

// Tabulates the link profile estimate against the unit-sphere profile
// sqrt(beta (1 - beta)). Estimates above the sphere profile confirm the
// comparison at that beta; estimates at or below it are inconclusive, since
// the estimator only bounds the profile from above (up to quadrature error) —
// a dip below can never count as a refutation.
LevyGromovReport levy_gromov_check(const LinkMetric& link, std::span<const double> betas);

const char* profile_verdict_name(ProfileVerdict v);
const char* profile_method_name(ProfileMethod m);

}  // namespace coniso
