#include "coniso/iso_analysis.hpp"

#include "coniso/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace coniso {

namespace {

constexpr double kPi = std::numbers::pi;

double region_perimeter(const AsymptoticConeMetric& metric, const Region& region) {
    if (region.kind == Region::Kind::Slab) return slice_data(metric, region.r).area;
    return graph_geometry(metric, *region.graph).area();
}

double region_volume(const AsymptoticConeMetric& metric, const Region& region) {
    if (region.kind == Region::Kind::Slab) return ball_volume(metric, region.r);
    return enclosed_volume(metric, *region.graph);
}

RadialGraph region_graph(const AsymptoticConeMetric& metric, const Region& region) {
    if (region.kind == Region::Kind::Leaf) return *region.graph;
    return RadialGraph::slice(region.r, metric.link().basis());
}

void require_three_dimensional(const AsymptoticConeMetric& metric, const char* who) {
    if (metric.ambient_dim() != 3) {
        std::ostringstream msg;
        msg << who << ": defined for 3-dimensional ambient manifolds only (m = " << metric.ambient_dim() << ")";
        throw std::invalid_argument(msg.str());
    }
}

// Boundary integrals of the pointwise data (H, |h|^2, ambient R) against the
// induced measure, shared by the three functionals.
struct BoundaryIntegrals {
    double area = 0.0, H_sq = 0.0, h_sq = 0.0, scalar = 0.0;
};

BoundaryIntegrals boundary_integrals(const AsymptoticConeMetric& metric, const Region& region,
                                     bool with_scalar) {
    const GraphGeometry g = graph_geometry(metric, region_graph(metric, region));
    const SphereBasis& basis = *g.basis;
    const SphereGrid& grid = basis.grid();
    BoundaryIntegrals out;
    for (int n = 0; n < grid.nodes(); ++n) {
        const double w = basis.weights()[n] * g.area_density[n];
        out.area += w;
        out.H_sq += w * g.H[n] * g.H[n];
        out.h_sq += w * g.h_norm_sq[n];
        if (with_scalar) {
            const std::vector<double> point = {g.F[n], grid.theta[grid.theta_index(n)],
                                               grid.phi[grid.phi_index(n)]};
            out.scalar += w * numeric_scalar_curvature(metric, point);
        }
    }
    return out;
}

}  // namespace

double iso_ratio(const AsymptoticConeMetric& metric, const Region& region) {
    const int m = metric.ambient_dim();
    const double perimeter = region_perimeter(metric, region);
    const double volume = region_volume(metric, region);
    return std::pow(perimeter, m) /
           (std::pow(static_cast<double>(m), m - 1) * unit_sphere_area(m - 1) * std::pow(volume, m - 1));
}

ConeAngleReport cone_angle(const LinkMetric& link) {
    ConeAngleReport rep;
    rep.value = area(link) / unit_sphere_area(link.dim());
    rep.ricci_condition = ricci_lower_bound(link).meets_cone_condition;
    rep.rigidity = std::abs(rep.value - 1.0) <= 1e-10;
    if (rep.ricci_condition && rep.value > 1.0 + 1e-10) {
        std::ostringstream msg;
        msg << "cone_angle: value " << rep.value
            << " exceeds 1 although Ric_L >= (m-2) g_L holds; the area comparison forbids this, so the "
               "discretization is inconsistent";
        throw ConsistencyError(msg.str());
    }
    rep.bound_satisfied = !rep.ricci_condition || rep.value <= 1.0 + 1e-10;
    return rep;
}

double huisken_functional(const AsymptoticConeMetric& metric, const Region& region) {
    require_three_dimensional(metric, "huisken_functional");
    return boundary_integrals(metric, region, false).H_sq / (16.0 * kPi);
}

CyReport cy_functional(const AsymptoticConeMetric& metric, const Region& region) {
    require_three_dimensional(metric, "cy_functional");
    const BoundaryIntegrals bi = boundary_integrals(metric, region, true);
    CyReport rep;
    rep.value = bi.H_sq + 2.0 * bi.h_sq + 2.0 * bi.scalar;
    rep.bound = 64.0 * kPi;
    rep.genus_zero_bound = 48.0 * kPi;
    rep.passes = rep.value <= rep.bound + 1e-6;
    rep.passes_genus_zero = rep.value <= rep.genus_zero_bound + 1e-6;
    return rep;
}

double h_sq_integral(const AsymptoticConeMetric& metric, const Region& region) {
    require_three_dimensional(metric, "h_sq_integral");
    return boundary_integrals(metric, region, false).h_sq;
}

IsoReport iso_report(const AsymptoticConeMetric& metric, const Region& region) {
    IsoReport rep;
    rep.ratio = iso_ratio(metric, region);
    rep.cone_angle_exact = cone_angle(metric.link()).value;
    if (metric.ambient_dim() == 3) {
        rep.functionals_available = true;
        rep.huisken_value = huisken_functional(metric, region);
        const CyReport cy = cy_functional(metric, region);
        rep.cy_value = cy.value;
        rep.cy_passes = cy.passes;
        rep.h_sq_integral = coniso::h_sq_integral(metric, region);
    }
    return rep;
}

LevyGromovReport levy_gromov_check(const LinkMetric& link, std::span<const double> betas) {
    if (link.dim() != 2)
        throw std::invalid_argument("levy_gromov_check: comparison link is S^2, need a 2-dimensional link");
    LevyGromovReport rep;
    const auto estimates = iso_profile_batch(link, betas);
    rep.all_confirmed = true;
    for (const auto& est : estimates) {
        LevyGromovRow row;
        row.beta = est.beta;
        row.link_estimate = est.value;
        row.sphere_profile = std::sqrt(est.beta * (1.0 - est.beta));
        row.method = est.method;
        row.is_upper_bound = est.is_upper_bound;
        row.verdict = est.value > row.sphere_profile + 1e-12 ? ProfileVerdict::Confirmed
                                                             : ProfileVerdict::Inconclusive;
        if (est.beta <= 0.0 || est.beta >= 1.0) row.verdict = ProfileVerdict::Inconclusive;
        rep.all_confirmed = rep.all_confirmed && row.verdict == ProfileVerdict::Confirmed;
        rep.rows.push_back(row);
    }
    return rep;
}

const char* profile_verdict_name(ProfileVerdict v) {
    return v == ProfileVerdict::Confirmed ? "confirmed" : "inconclusive";
}

const char* profile_method_name(ProfileMethod m) {
    switch (m) {
        case ProfileMethod::CapExact:
            return "cap_exact";
        case ProfileMethod::CapCandidate:
            return "cap_candidate";
        case ProfileMethod::LevelSetUpperBound:
            return "level_set_upper_bound";
    }
    return "unknown";
}

}  // namespace coniso
