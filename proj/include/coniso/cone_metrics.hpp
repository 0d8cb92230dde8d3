#pragma once

#include "coniso/link_geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace coniso {

// Radial profiles for metric perturbations. All are smooth on the annulus
// with two analytic derivatives.
enum class ProfileKind { Power, PowerLog, Bump };

struct RadialProfile {
    ProfileKind kind = ProfileKind::Power;
    double tau = 1.0;        // decay rate for Power / PowerLog
    double amplitude = 0.0;
    double bump_lo = 0.0;    // Bump support [bump_lo, bump_hi]
    double bump_hi = 0.0;

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
};

// One perturbation term amplitude * p(r) * psi(x). A missing field means
// psi == 1; non-constant fields require a 2-dimensional link.
struct PerturbationTerm {
    RadialProfile profile;
    std::optional<SpectralField> field;
};

struct Perturbation {
    std::optional<PerturbationTerm> alpha;  // multiplies dr^2
    std::optional<PerturbationTerm> beta;   // multiplies r^2 g_L
};

// Jet of a perturbation term at a point of the annulus. dx/drx/dxx refer to
// the two link coordinates of a 2-dimensional link and vanish for constant
// fields.
struct TermJet {
    double v = 0.0, dr = 0.0, drr = 0.0;
    std::array<double, 2> dx{}, drx{};
    std::array<std::array<double, 2>, 2> dxx{};
};

// Ambient metric g = (1 + alpha) dr^2 + r^2 (1 + beta) g_L on the annulus
// (r_min, r_max) x L. In the hyperspherical charts of the supported links the
// metric is diagonal. Immutable after construction and safe to share across
// threads.
class AsymptoticConeMetric {
public:
    AsymptoticConeMetric(LinkMetric link, double r_min, double r_max);  // exact cone
    AsymptoticConeMetric(LinkMetric link, double r_min, double r_max, Perturbation pert, double decay_rate);

    const LinkMetric& link() const { return link_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    double decay_rate() const { return decay_rate_; }
    int ambient_dim() const { return link_.ambient_dim(); }
    bool exact() const { return !pert_.alpha && !pert_.beta; }
    const Perturbation& perturbation() const { return pert_; }

    // order 0: value; order 1: adds dr, drr, dx, drx; order 2: adds dxx.
    TermJet alpha_jet(double r, int node, int order) const;
    TermJet beta_jet(double r, int node, int order) const;
    double alpha_at(double r, std::span<const double> link_coords) const;
    double beta_at(double r, std::span<const double> link_coords) const;

    // Diagonal entries of g at ambient coordinates (r, x^1, ..., x^d); values
    // only. This is the sole surface the finite-difference curvature oracle
    // sees.
    void metric_diag(std::span<const double> coords, std::span<double> out) const;

    // Christoffel symbols of g at ambient coordinates, assembled analytically
    // from the chart and perturbation jets. gamma[p][q][s] = Gamma^p_{qs}.
    void christoffels(std::span<const double> coords,
                      double gamma[kMaxLinkDim + 1][kMaxLinkDim + 1][kMaxLinkDim + 1]) const;

    void require_inside(double r, double margin = 0.0) const;

private:
    void validate_positivity() const;
    TermJet term_jet(const std::optional<PerturbationTerm>& term,
                     const std::array<Eigen::VectorXd, kBasisDerivCount>* tables, double r, int node,
                     int order) const;

    LinkMetric link_;
    double r_min_ = 1.0, r_max_ = 10.0, decay_rate_ = 1.0;
    Perturbation pert_;
    // cached grid tables of the perturbation fields (value + derivatives)
    std::array<Eigen::VectorXd, kBasisDerivCount> alpha_tables_, beta_tables_;
};

// --- closed-form cone curvature (Ricci of g_C = dr^2 + r^2 g_L) ---

struct ConeDirection {
    enum class Kind { Radial, RadialTangentMixed, Tangent };
    Kind kind = Kind::Radial;
    std::vector<double> link_point;  // Tangent: link coordinates
    std::vector<double> tangent;     // Tangent: link components of X

    static ConeDirection radial() { return {Kind::Radial, {}, {}}; }
    static ConeDirection mixed() { return {Kind::RadialTangentMixed, {}, {}}; }
    static ConeDirection tangent_at(std::vector<double> point, std::vector<double> components) {
        return {Kind::Tangent, std::move(point), std::move(components)};
    }
};

// Ricci curvature of the exact cone for a g_C-unit direction: 0 radially and
// in mixed directions, (Ric_L - (m-2) g_L)(X, X) / r^2 for unit tangents.
double cone_ricci(const LinkMetric& link, double r, const ConeDirection& direction);

// --- finite-difference curvature oracle (sees only metric_diag) ---

struct FdOptions {
    double relative_step = 1e-3;
    bool richardson = true;
};

Eigen::MatrixXd numeric_ricci_tensor(const AsymptoticConeMetric& metric, std::span<const double> point,
                                     const FdOptions& options = {});
double numeric_ricci(const AsymptoticConeMetric& metric, std::span<const double> point,
                     std::span<const double> u, std::span<const double> v, const FdOptions& options = {});
double numeric_scalar_curvature(const AsymptoticConeMetric& metric, std::span<const double> point,
                                const FdOptions& options = {});

// --- cone identities and integrals ---

struct VectorSample {
    std::vector<double> point;       // ambient coordinates, size m
    std::vector<double> components;  // Y components, size m
};

// sup over samples of |nabla_Y (r d_r) - Y|_g from analytic Christoffels.
// Zero (to roundoff) for the exact cone; for perturbed metrics the returned
// deviation is informational.
double radial_identity_check(const AsymptoticConeMetric& metric, std::span<const VectorSample> samples);

// Volume of the coordinate region B_r, with the missing core (0, r_min) x L
// assigned its exact-cone volume area(L) r_min^m / m.
double ball_volume(const AsymptoticConeMetric& metric, double r);
// d/dr of ball_volume: the sqrt(g_rr)-weighted slice area (coarea factor).
double ball_volume_derivative(const AsymptoticConeMetric& metric, double r);
// Radius with ball_volume(r) == volume, by Newton iteration.
double ball_volume_radius(const AsymptoticConeMetric& metric, double volume);

struct SliceData {
    double r = 0.0;
    double area = 0.0;
    SpectralField H_field;          // degree-0 carrier for links of dim != 2
    SpectralField h_norm_sq_field;
    double umbilicity_deviation = 0.0;  // sup |h - (H/(m-1)) g_slice|
};
// First/second fundamental form data of the slice {r} x L under g, from
// analytic r-differentiation of the metric family. Slices of the exact cone
// have H == (m-1)/r and vanishing umbilicity deviation.
SliceData slice_data(const AsymptoticConeMetric& metric, double r);

// sup over the link grid of sum_{l<=k} r^l |nabla^l (g - g_C)|_{g_C}, with
// nabla the Levi-Civita connection of the exact cone.
double decay_norm(const AsymptoticConeMetric& metric, int k, double r);

}  // namespace coniso
