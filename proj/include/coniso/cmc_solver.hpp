#pragma once

#include "coniso/cone_metrics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace coniso {

// Radial graph Sigma = {(rho (1 + u(x)), x)} over the link. sup|u| < 1/2 keeps
// the graph a uniform distance from the cone tip and the coordinate chart.
struct RadialGraph {
    double base_radius = 1.0;
    SpectralField u;

    RadialGraph(double base_radius, SpectralField u);
    static RadialGraph slice(double radius, std::shared_ptr<const SphereBasis> basis);
    // Constant graph carrier usable over links of any dimension.
    static RadialGraph constant(double base_radius, double offset);

    double sup_u() const { return u.sup_norm(); }
    bool is_constant() const;
};

// Pointwise geometry of a radial graph under the ambient metric, tabulated on
// the link quadrature grid (2-dimensional links).
struct GraphGeometry {
    std::shared_ptr<const SphereBasis> basis;
    Eigen::VectorXd F;                       // graph radius per node
    Eigen::VectorXd H;                       // mean curvature
    Eigen::VectorXd h_norm_sq;               // |h|^2
    Eigen::VectorXd area_density;            // dA_Sigma / dA_round-unit-sphere
    Eigen::VectorXd W;                       // conormal normalization
    Eigen::VectorXd nu_r, nu_1, nu_2;        // unit normal coordinate components
    Eigen::VectorXd G11, G12, G22;           // induced metric
    Eigen::VectorXd Gi11, Gi12, Gi22;        // inverse induced metric
    // partial derivatives of H with respect to (F, F_t, F_p, F_tt, F_tp, F_pp)
    std::array<Eigen::VectorXd, 6> H_jet;

    double area() const;
    double H_mean() const;
    double H_osc() const;
};

GraphGeometry graph_geometry(const AsymptoticConeMetric& metric, const RadialGraph& graph);

// Pointwise mean curvature of the graph surface, on the grid and projected to
// coefficients. For links of dimension != 2 only constant graphs (slices) are
// representable and a constant field is returned.
SpectralField mean_curvature(const AsymptoticConeMetric& metric, const RadialGraph& graph);

// Directional derivative of u -> mean_curvature(metric, (rho, u)) in direction
// v, assembled from the analytic jet of the pointwise curvature formula. At
// the exact cone with base 1 it reduces to -Delta_L v - (m-1) v.
SpectralField linearization_apply(const AsymptoticConeMetric& metric, const RadialGraph& graph,
                                  const SpectralField& v);

// Volume below the graph, with the exact-cone core convention of ball_volume.
double enclosed_volume(const AsymptoticConeMetric& metric, const RadialGraph& graph);

struct CmcTarget {
    enum class Kind { MeanCurvature, Volume };
    Kind kind = Kind::MeanCurvature;
    double value = 0.0;
    static CmcTarget mean_curvature(double H0) { return {Kind::MeanCurvature, H0}; }
    static CmcTarget volume(double V) { return {Kind::Volume, V}; }
};

struct JacobiSpectrum {
    std::vector<double> eigenvalues;  // spectrum restricted to mean-zero functions
    double lowest = 0.0;
    bool vp_stable = false;
};

// Eigenvalues of -Delta_Sigma - (|h|^2 + Ric(nu, nu)) on the orthogonal
// complement of the constants (volume-preserving test space). |h|^2 comes from
// the graph geometry and Ric(nu, nu) from the finite-difference ambient Ricci.
JacobiSpectrum jacobi_spectrum(const AsymptoticConeMetric& metric, const RadialGraph& graph, int count);

struct LeafDiagnostics {
    double enclosed_volume = 0.0;
    double H_mean = 0.0;
    double H_osc = 0.0;
    std::vector<double> jacobi_eigenvalues;
    double lowest_vp_eigenvalue = 0.0;
    bool vp_stable = false;
    double sup_u = 0.0;
    // Leaves with sup|u| <= 0.25 enclosing at least the volume of B_{4 r_min}
    // sit inside the band where the solution is provably unique; leaves
    // outside it are still returned but flagged.
    bool within_uniqueness_band = false;
};

struct SolveOptions {
    double tolerance = 1e-10;   // sup-residual stopping level
    int max_iterations = 30;
    int max_backtracks = 8;
    bool with_spectrum = true;
    int jacobi_count = 6;
    double vp_tolerance = 1e-8;
};

struct SolveResult {
    RadialGraph leaf;
    LeafDiagnostics diagnostics;
    double H0 = 0.0;  // solved constant mean curvature
    int iterations = 0;
    std::vector<double> residual_history;
};

// Damped Newton iteration for H(g, u) = H0, or the bordered system with the
// enclosed-volume constraint adjoined when targeting a volume. Refuses to run
// when the spectral-gap hypothesis lambda_1(-Delta_L) > m-1 fails, since the
// linearized operator is then not invertible.
SolveResult solve_cmc(const AsymptoticConeMetric& metric, const CmcTarget& target, const RadialGraph& initial,
                      const SolveOptions& options = {});

struct FoliationReport {
    std::vector<double> volumes, radii, sup_u, H0, lowest_vp;
    double min_gap = 0.0;          // min over grid and consecutive leaves of radial separation
    bool nested = false;
    bool H_strictly_decreasing = false;
    bool sup_u_decreasing = false;
    bool all_vp_stable = false;
    std::optional<double> sup_u_loglog_slope;  // absent when some sup_u vanishes
};

struct FoliationResult {
    std::vector<SolveResult> leaves;
    FoliationReport report;
    bool completed = false;
    std::string error;
};

// Solves the leaves of an ascending volume grid by continuation (previous leaf
// as initial guess) and reports nesting, monotonicity, and stability. A leaf
// failure aborts with the partial results recorded.
FoliationResult foliate(const AsymptoticConeMetric& metric, std::span<const double> volumes,
                        const SolveOptions& options = {});

}  // namespace coniso
