#pragma once

#include "coniso/spectral_field.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace coniso {

// Supported link dimensions run up to S^3 (ambient dimension 4).
inline constexpr int kMaxLinkDim = 4;

// (d-1)-dimensional area of the unit sphere S^{d-1}... indexing convention:
// unit_sphere_area(d) is the d-dimensional area of S^d in R^{d+1}, so
// unit_sphere_area(2) == 4 pi.
double unit_sphere_area(int d);

enum class LinkKind { ScaledRoundSphere, ConformalSphere2D };

// Closed link manifold (L, g_L) in one of two closed-form representations:
//   ScaledRoundSphere:  g_L = rho^2 g_{S^d} for any dimension d >= 1,
//   ConformalSphere2D:  g_L = e^{2 phi} g_{S^2} with phi a SpectralField.
//
// Coordinates are hyperspherical angles (t_1, ..., t_d); for d == 2 these are
// (theta, phi) of the quadrature grid. In these charts every supported link
// metric is diagonal.
class LinkMetric {
public:
    static LinkMetric scaled_sphere(int dim, double radius, int degree = 16);
    static LinkMetric conformal_s2(SpectralField conformal_factor);

    LinkKind kind() const { return kind_; }
    int dim() const { return dim_; }          // d = m - 1
    int ambient_dim() const { return dim_ + 1; }
    double radius() const { return radius_; }
    const SpectralField& conformal_factor() const { return *conformal_; }

    // Spherical-harmonic basis carrying fields on the link; null unless dim == 2.
    const std::shared_ptr<const SphereBasis>& basis() const { return basis_; }
    bool has_basis() const { return basis_ != nullptr; }
    // Oversampled basis used for quadratures of non-band-limited integrands.
    const std::shared_ptr<const SphereBasis>& assembly_basis() const { return assembly_basis_; }

    // Diagonal metric entries s_i and their coordinate partials at a point.
    struct ChartJet {
        int dim = 0;
        std::array<double, kMaxLinkDim> s{};
        std::array<std::array<double, kMaxLinkDim>, kMaxLinkDim> ds{};                   // ds[i][a]
        std::array<std::array<std::array<double, kMaxLinkDim>, kMaxLinkDim>, kMaxLinkDim> dds{};  // dds[i][a][b]
    };
    ChartJet chart_at_node(int node, int order) const;                 // dim == 2 only
    ChartJet chart_at(std::span<const double> coords, int order) const;

    // sqrt(det g_L) relative to the round unit-sphere area element at a grid node.
    double area_density(int node) const;
    Eigen::VectorXd area_density_values(const SphereBasis& on) const;  // dim == 2 only

    // Conformal factor jet at a grid node: {phi, phi_t, phi_p, phi_tt, phi_tp, phi_pp}.
    const Eigen::VectorXd& conformal_derivative(BasisDeriv which) const;

    // Gaussian curvature on the grid (dim == 2): 1/rho^2 or e^{-2 phi}(1 - Delta phi).
    const Eigen::VectorXd& gauss_curvature_values() const;

    bool is_unit_round(double tol = 1e-8) const;

private:
    LinkMetric() = default;

    LinkKind kind_ = LinkKind::ScaledRoundSphere;
    int dim_ = 2;
    double radius_ = 1.0;
    std::optional<SpectralField> conformal_;
    std::shared_ptr<const SphereBasis> basis_;
    std::shared_ptr<const SphereBasis> assembly_basis_;
    std::array<Eigen::VectorXd, kBasisDerivCount> phi_derivs_;
    Eigen::VectorXd gauss_curvature_;
};

// H^{m-1}(L, g_L): closed form for scaled spheres, quadrature of e^{2 phi} for
// conformal links.
double area(const LinkMetric& link);

struct RicciBound {
    double value = 0.0;               // largest c with Ric_L >= c g_L
    double required = 0.0;            // m - 2
    bool meets_cone_condition = true; // warning flag is the negation
};
RicciBound ricci_lower_bound(const LinkMetric& link);

// First `count` eigenvalues of -Delta_{g_L}, ascending, multiplicity included,
// starting at 0. Closed form for scaled spheres; spectral Galerkin for
// conformal links.
std::vector<double> laplace_spectrum(const LinkMetric& link, int count);

// Eigenpairs of the conformal Galerkin problem (dim == 2 links); for round
// links the eigenfunctions are the basis harmonics themselves.
struct LaplaceEigenbasis {
    std::vector<double> eigenvalues;
    std::vector<SpectralField> eigenfunctions;
};
LaplaceEigenbasis laplace_eigenbasis(const LinkMetric& link, int count);

struct LichnerowiczReport {
    double ricci_bound = 0.0;
    double lambda1 = 0.0;
    double threshold = 0.0;  // m - 1
    bool passes = false;     // lambda1 > m - 1
    bool ricci_condition = false;
    bool unit_round = false;
};
// Checks the spectral-gap hypothesis lambda_1(-Delta_L) > m-1 and its
// consistency with the eigenvalue estimate: a non-round link with
// Ric_L >= (m-2) g_L must pass; a violation throws ConsistencyError since it
// can only come from discretization failure.
LichnerowiczReport lichnerowicz_check(const LinkMetric& link);

enum class ProfileMethod { CapExact, CapCandidate, LevelSetUpperBound };

struct ProfileEstimate {
    double beta = 0.0;
    double value = 0.0;
    ProfileMethod method = ProfileMethod::CapExact;
    bool is_upper_bound = false;
};

// Normalized isoperimetric profile I(beta) = inf H^{m-2}(boundary) / H^{m-1}(L)
// over regions of volume fraction beta. Exact geodesic-cap value on round
// spheres; on conformal links the minimum over geodesic-cap candidates and
// eigenfunction level sets, which only bounds the profile from above.
ProfileEstimate iso_profile(const LinkMetric& link, double beta);
std::vector<ProfileEstimate> iso_profile_batch(const LinkMetric& link, std::span<const double> betas);

// Exact cap profile of the unit round S^d; scale by 1/rho for radius rho.
double round_sphere_profile(int dim, double beta);

}  // namespace coniso
