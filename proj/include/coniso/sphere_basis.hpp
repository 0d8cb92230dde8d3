#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

namespace coniso {

// Gauss-Legendre rule on [-1, 1], nodes ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Quadrature grid on the unit round 2-sphere: Gauss-Legendre in cos(theta)
// crossed with equispaced longitudes. Node index = i_theta * n_phi + i_phi.
// Poles are never grid nodes.
struct SphereGrid {
    int n_theta = 0;
    int n_phi = 0;
    std::vector<double> theta;      // size n_theta
    std::vector<double> cos_theta;  // Gauss-Legendre nodes, ascending
    std::vector<double> sin_theta;
    std::vector<double> gl_weight;  // Gauss-Legendre weights
    std::vector<double> phi;        // size n_phi, phi_j = 2 pi j / n_phi

    SphereGrid() = default;
    SphereGrid(int nt, int np);

    int nodes() const { return n_theta * n_phi; }
    int theta_index(int node) const { return node / n_phi; }
    int phi_index(int node) const { return node % n_phi; }
    // Weight integrating against the round area element of the unit sphere.
    double weight(int node) const;
};

enum class BasisDeriv { Value = 0, Theta = 1, Phi = 2, ThetaTheta = 3, ThetaPhi = 4, PhiPhi = 5 };
inline constexpr int kBasisDerivCount = 6;

// Real orthonormal spherical harmonics up to a truncation degree, tabulated on
// a SphereGrid together with first and second angular derivatives.
//
// Flat coefficient index for (l, k), |k| <= l, is l*l + l + k. The quadrature
// is exact on products of basis functions whenever n_theta >= degree + 1 and
// n_phi >= 2*degree + 1, so analyze(synthesize(c)) == c to machine precision.
class SphereBasis {
public:
    explicit SphereBasis(int degree) : SphereBasis(degree, degree + 1, 2 * degree + 2) {}
    SphereBasis(int degree, int n_theta, int n_phi);

    int degree() const { return degree_; }
    int size() const { return (degree_ + 1) * (degree_ + 1); }
    const SphereGrid& grid() const { return grid_; }

    static int index(int l, int k) { return l * l + l + k; }
    static std::pair<int, int> degree_order(int index);

    const Eigen::MatrixXd& table(BasisDeriv which) const { return tables_[static_cast<int>(which)]; }

    // values = table(Value) * coeff; derivatives via the other tables.
    Eigen::VectorXd synthesize(const Eigen::VectorXd& coeff, BasisDeriv which = BasisDeriv::Value) const;
    // L2 projection by quadrature; exact for band-limited grids as noted above.
    Eigen::VectorXd analyze(const Eigen::VectorXd& values) const;

    // Quadrature of raw grid values against the round unit-sphere area element.
    double integrate(const Eigen::VectorXd& values) const;
    const Eigen::VectorXd& weights() const { return weights_; }

    // Single basis row at an arbitrary point (values only; valid at the poles).
    void eval_row(double theta, double phi, Eigen::VectorXd& row) const;
    double eval(const Eigen::VectorXd& coeff, double theta, double phi) const;
    // Value and angular derivatives up to order 2 of a coefficient vector at
    // an arbitrary interior point, in BasisDeriv order.
    std::array<double, kBasisDerivCount> eval_jet(const Eigen::VectorXd& coeff, double theta, double phi) const;

private:
    int degree_;
    SphereGrid grid_;
    Eigen::VectorXd weights_;  // per-node quadrature weights
    std::array<Eigen::MatrixXd, kBasisDerivCount> tables_;  // nodes x size()
};

// Fully normalized associated Legendre functions at a fixed colatitude:
// P(l, k) for 0 <= k <= l <= degree, plus d/dtheta and d^2/dtheta^2.
// The second derivative uses the Legendre ODE and requires sin(theta) > 0.
struct LegendreTable {
    int degree;
    Eigen::MatrixXd p, dp, ddp;  // (degree+1) x (degree+1), lower triangle used
    LegendreTable(int degree, double cos_theta, double sin_theta, bool with_derivatives);
};

std::shared_ptr<const SphereBasis> make_basis(int degree);
std::shared_ptr<const SphereBasis> make_basis(int degree, int n_theta, int n_phi);

}  // namespace coniso
