#include "coniso/link_geometry.hpp"

#include "coniso/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <sstream>

namespace coniso {

namespace {
constexpr double kPi = std::numbers::pi;
}

double unit_sphere_area(int d) {
    if (d < 0) throw std::invalid_argument("unit_sphere_area: negative dimension");
    // omega_0 = 2, omega_1 = 2 pi, omega_d = 2 pi omega_{d-2} / (d - 1)
    double even = 2.0, odd = 2.0 * kPi;
    if (d == 0) return even;
    if (d == 1) return odd;
    for (int k = 2; k <= d; ++k) {
        const double next = 2.0 * kPi * (k % 2 == 0 ? even : odd) / (k - 1.0);
        (k % 2 == 0 ? even : odd) = next;
    }
    return d % 2 == 0 ? even : odd;
}

LinkMetric LinkMetric::scaled_sphere(int dim, double radius, int degree) {
    if (dim < 1 || dim > kMaxLinkDim) throw std::invalid_argument("LinkMetric: dim out of supported range");
    if (radius <= 0.0) throw std::invalid_argument("LinkMetric: radius must be positive");
    LinkMetric link;
    link.kind_ = LinkKind::ScaledRoundSphere;
    link.dim_ = dim;
    link.radius_ = radius;
    if (dim == 2) {
        link.basis_ = make_basis(degree);
        link.assembly_basis_ = link.basis_;
        link.gauss_curvature_ =
            Eigen::VectorXd::Constant(link.basis_->grid().nodes(), 1.0 / (radius * radius));
    }
    return link;
}

LinkMetric LinkMetric::conformal_s2(SpectralField conformal_factor) {
    const int degree = conformal_factor.degree();
    if (degree < 4) throw std::invalid_argument("LinkMetric: conformal truncation degree must be >= 4");
    LinkMetric link;
    link.kind_ = LinkKind::ConformalSphere2D;
    link.dim_ = 2;
    link.radius_ = 1.0;
    link.basis_ = conformal_factor.basis();
    link.assembly_basis_ = make_basis(degree, 2 * (degree + 1), 2 * (2 * degree + 2));
    for (int w = 0; w < kBasisDerivCount; ++w)
        link.phi_derivs_[w] = conformal_factor.derivative_values(static_cast<BasisDeriv>(w));
    // K = e^{-2 phi} (1 - Delta_round phi), Delta in coefficient space.
    Eigen::VectorXd lap_coeff = conformal_factor.coeff();
    for (int a = 0; a < lap_coeff.size(); ++a) {
        const auto [l, k] = SphereBasis::degree_order(a);
        lap_coeff[a] *= -static_cast<double>(l) * (l + 1);
    }
    const Eigen::VectorXd lap = link.basis_->synthesize(lap_coeff);
    const Eigen::VectorXd& phi = conformal_factor.values();
    link.gauss_curvature_.resize(phi.size());
    for (int n = 0; n < phi.size(); ++n)
        link.gauss_curvature_[n] = std::exp(-2.0 * phi[n]) * (1.0 - lap[n]);
    link.conformal_ = std::move(conformal_factor);
    return link;
}

const Eigen::VectorXd& LinkMetric::conformal_derivative(BasisDeriv which) const {
    if (kind_ != LinkKind::ConformalSphere2D)
        throw std::logic_error("LinkMetric: conformal derivatives on a round link");
    return phi_derivs_[static_cast<int>(which)];
}

const Eigen::VectorXd& LinkMetric::gauss_curvature_values() const {
    if (dim_ != 2) throw std::logic_error("LinkMetric: Gaussian curvature needs a 2-dimensional link");
    return gauss_curvature_;
}

namespace {

// Diagonal entries of the unit round S^d in hyperspherical angles, with
// partials up to the requested order: s_i = prod_{j<i} sin^2 t_j.
void round_chart(int dim, std::span<const double> coords, int order, LinkMetric::ChartJet& jet) {
    jet.dim = dim;
    for (auto& row : jet.ds) row.fill(0.0);
    for (auto& mat : jet.dds)
        for (auto& row : mat) row.fill(0.0);
    for (int i = 0; i < dim; ++i) {
        double s = 1.0;
        for (int j = 0; j < i; ++j) {
            const double sn = std::sin(coords[j]);
            s *= sn * sn;
        }
        jet.s[i] = s;
        if (order < 1) continue;
        for (int a = 0; a < i; ++a) {
            const double cot = std::cos(coords[a]) / std::sin(coords[a]);
            jet.ds[i][a] = 2.0 * cot * s;
        }
        if (order < 2) continue;
        for (int a = 0; a < i; ++a) {
            const double sa = std::sin(coords[a]);
            const double cot = std::cos(coords[a]) / sa;
            jet.dds[i][a][a] = (4.0 * cot * cot - 2.0 / (sa * sa)) * s;
            for (int b = 0; b < i; ++b) {
                if (b == a) continue;
                const double cotb = std::cos(coords[b]) / std::sin(coords[b]);
                jet.dds[i][a][b] = 4.0 * cot * cotb * s;
            }
        }
    }
}

void scale_chart(LinkMetric::ChartJet& jet, double factor) {
    for (int i = 0; i < jet.dim; ++i) {
        jet.s[i] *= factor;
        for (int a = 0; a < jet.dim; ++a) {
            jet.ds[i][a] *= factor;
            for (int b = 0; b < jet.dim; ++b) jet.dds[i][a][b] *= factor;
        }
    }
}

// Multiply a round chart by e^{2 phi} given the jet of phi.
void conformal_chart(LinkMetric::ChartJet& jet, int order, double phi, const double grad[2], const double hess[2][2]) {
    const double e2 = std::exp(2.0 * phi);
    for (int i = 0; i < jet.dim; ++i) {
        const double s0 = jet.s[i];
        double ds0[kMaxLinkDim] = {};
        double dds0[kMaxLinkDim][kMaxLinkDim] = {};
        for (int a = 0; a < jet.dim; ++a) {
            ds0[a] = jet.ds[i][a];
            for (int b = 0; b < jet.dim; ++b) dds0[a][b] = jet.dds[i][a][b];
        }
        jet.s[i] = e2 * s0;
        if (order < 1) continue;
        for (int a = 0; a < jet.dim; ++a) jet.ds[i][a] = e2 * (2.0 * grad[a] * s0 + ds0[a]);
        if (order < 2) continue;
        for (int a = 0; a < jet.dim; ++a)
            for (int b = 0; b < jet.dim; ++b)
                jet.dds[i][a][b] = e2 * ((2.0 * hess[a][b] + 4.0 * grad[a] * grad[b]) * s0 +
                                         2.0 * grad[a] * ds0[b] + 2.0 * grad[b] * ds0[a] + dds0[a][b]);
    }
}

}  // namespace

LinkMetric::ChartJet LinkMetric::chart_at(std::span<const double> coords, int order) const {
    if (static_cast<int>(coords.size()) != dim_) throw std::invalid_argument("LinkMetric: wrong coordinate count");
    ChartJet jet;
    round_chart(dim_, coords, order, jet);
    if (kind_ == LinkKind::ScaledRoundSphere) {
        scale_chart(jet, radius_ * radius_);
        return jet;
    }
    if (order == 0) {
        scale_chart(jet, std::exp(2.0 * conformal_->eval(coords[0], coords[1])));
        return jet;
    }
    const auto j = basis_->eval_jet(conformal_->coeff(), coords[0], coords[1]);
    const double grad[2] = {j[1], j[2]};
    const double hess[2][2] = {{j[3], j[4]}, {j[4], j[5]}};
    conformal_chart(jet, order, j[0], grad, hess);
    return jet;
}

LinkMetric::ChartJet LinkMetric::chart_at_node(int node, int order) const {
    if (dim_ != 2) throw std::logic_error("LinkMetric: node charts need a 2-dimensional link");
    const SphereGrid& g = basis_->grid();
    const double coords[2] = {g.theta[g.theta_index(node)], g.phi[g.phi_index(node)]};
    ChartJet jet;
    round_chart(2, coords, order, jet);
    if (kind_ == LinkKind::ScaledRoundSphere) {
        scale_chart(jet, radius_ * radius_);
        return jet;
    }
    const double phi = phi_derivs_[0][node];
    const double grad[2] = {phi_derivs_[1][node], phi_derivs_[2][node]};
    const double hess[2][2] = {{phi_derivs_[3][node], phi_derivs_[4][node]},
                               {phi_derivs_[4][node], phi_derivs_[5][node]}};
    conformal_chart(jet, order, phi, grad, hess);
    return jet;
}

double LinkMetric::area_density(int node) const {
    if (dim_ != 2) throw std::logic_error("LinkMetric: area density needs a 2-dimensional link");
    if (kind_ == LinkKind::ScaledRoundSphere) return radius_ * radius_;
    return std::exp(2.0 * phi_derivs_[0][node]);
}

Eigen::VectorXd LinkMetric::area_density_values(const SphereBasis& on) const {
    if (dim_ != 2) throw std::logic_error("LinkMetric: area density needs a 2-dimensional link");
    const int nn = on.grid().nodes();
    if (kind_ == LinkKind::ScaledRoundSphere)
        return Eigen::VectorXd::Constant(nn, radius_ * radius_);
    const Eigen::VectorXd phi = on.synthesize(conformal_->coeff());
    return phi.unaryExpr([](double p) { return std::exp(2.0 * p); });
}

bool LinkMetric::is_unit_round(double tol) const {
    if (kind_ == LinkKind::ScaledRoundSphere) return std::abs(radius_ - 1.0) <= tol;
    const Eigen::VectorXd& K = gauss_curvature_values();
    return (K.array() - 1.0).abs().maxCoeff() <= tol;
}

double area(const LinkMetric& link) {
    if (link.kind() == LinkKind::ScaledRoundSphere)
        return std::pow(link.radius(), link.dim()) * unit_sphere_area(link.dim());
    const SphereBasis& basis = *link.assembly_basis();
    return basis.integrate(link.area_density_values(basis));
}

RicciBound ricci_lower_bound(const LinkMetric& link) {
    RicciBound out;
    const int m = link.ambient_dim();
    out.required = static_cast<double>(m - 2);
    if (link.kind() == LinkKind::ScaledRoundSphere) {
        out.value = (m - 2) / (link.radius() * link.radius());
    } else {
        out.value = link.gauss_curvature_values().minCoeff();
    }
    out.meets_cone_condition = out.value >= out.required - 1e-9;
    return out;
}

namespace {

// Multiplicity of the eigenvalue l(l+d-1) on the unit round S^d.
double round_multiplicity(int d, int l) {
    if (l == 0) return 1.0;
    if (d == 1) return 2.0;
    // (2l + d - 1) / l * binom(l + d - 2, l - 1) / (d - 1)
    double binom = 1.0;
    for (int j = 1; j <= d - 2; ++j) binom *= static_cast<double>(l + j) / j;
    return binom * (2.0 * l + d - 1.0) / (d - 1.0);
}

Eigen::MatrixXd conformal_mass_matrix(const LinkMetric& link) {
    const SphereBasis& basis = *link.assembly_basis();
    const Eigen::VectorXd density = link.area_density_values(basis);
    const Eigen::VectorXd w = basis.weights().cwiseProduct(density);
    const Eigen::MatrixXd& T = basis.table(BasisDeriv::Value);
    return T.transpose() * w.asDiagonal() * T;
}

}  // namespace

std::vector<double> laplace_spectrum(const LinkMetric& link, int count) {
    if (count < 2) throw std::invalid_argument("laplace_spectrum: count must be >= 2");
    std::vector<double> out;
    out.reserve(count);
    if (link.kind() == LinkKind::ScaledRoundSphere) {
        const int d = link.dim();
        const double rho2 = link.radius() * link.radius();
        for (int l = 0; static_cast<int>(out.size()) < count; ++l) {
            const double lam = l * (l + d - 1.0) / rho2;
            const int mult = static_cast<int>(std::llround(round_multiplicity(d, l)));
            for (int j = 0; j < mult && static_cast<int>(out.size()) < count; ++j) out.push_back(lam);
        }
        return out;
    }
    const auto eb = laplace_eigenbasis(link, count);
    return eb.eigenvalues;
}

LaplaceEigenbasis laplace_eigenbasis(const LinkMetric& link, int count) {
    if (!link.has_basis()) throw std::logic_error("laplace_eigenbasis: needs a 2-dimensional link");
    const auto& basis = link.basis();
    const int nb = basis->size();
    if (count > nb - 1) throw std::invalid_argument("laplace_eigenbasis: count exceeds (N+1)^2 - 1");

    LaplaceEigenbasis out;
    if (link.kind() == LinkKind::ScaledRoundSphere) {
        const double rho2 = link.radius() * link.radius();
        for (int a = 0; a < nb && static_cast<int>(out.eigenvalues.size()) < count; ++a) {
            const auto [l, k] = SphereBasis::degree_order(a);
            out.eigenvalues.push_back(l * (l + 1.0) / rho2);
            out.eigenfunctions.push_back(SpectralField::harmonic(basis, l, k, 1.0));
        }
        return out;
    }

    // Galerkin problem A c = lambda B c. The Dirichlet form on a conformal
    // 2-sphere metric equals the round one, so A = diag(l(l+1)) exactly; the
    // mass matrix carries the weight e^{2 phi}.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
    for (int a = 0; a < nb; ++a) {
        const auto [l, k] = SphereBasis::degree_order(a);
        A(a, a) = static_cast<double>(l) * (l + 1);
    }
    const Eigen::MatrixXd B = conformal_mass_matrix(link);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
    if (solver.info() != Eigen::Success)
        throw SolverError("laplace_eigenbasis: generalized eigensolver failed to converge");

    const Eigen::VectorXd& lam = solver.eigenvalues();
    const Eigen::MatrixXd& vec = solver.eigenvectors();
    for (int a = 0; a < count; ++a) {
        const Eigen::VectorXd c = vec.col(a);
        const double res = (A * c - lam[a] * (B * c)).norm();
        if (res > 1e-10 * (1.0 + std::abs(lam[a])) * c.norm()) {
            std::ostringstream msg;
            msg << "laplace_eigenbasis: eigenpair " << a << " residual " << res << " exceeds tolerance";
            throw SolverError(msg.str(), {res});
        }
        out.eigenvalues.push_back(lam[a]);
        out.eigenfunctions.push_back(SpectralField::from_coefficients(basis, c));
    }
    return out;
}

LichnerowiczReport lichnerowicz_check(const LinkMetric& link) {
    LichnerowiczReport rep;
    const int m = link.ambient_dim();
    rep.threshold = static_cast<double>(m - 1);
    rep.ricci_bound = ricci_lower_bound(link).value;
    rep.lambda1 = laplace_spectrum(link, 2)[1];
    rep.passes = rep.lambda1 > rep.threshold;
    rep.ricci_condition = rep.ricci_bound >= (m - 2) - 1e-9;
    rep.unit_round = link.is_unit_round();
    // Eigenvalue estimate with its rigidity case: Ric >= (m-2) g on a non-round
    // link of dimension >= 2 forces lambda_1 > m-1.
    if (link.dim() >= 2 && rep.ricci_condition && !rep.unit_round && !rep.passes) {
        std::ostringstream msg;
        msg << "lichnerowicz_check: link has Ricci bound " << rep.ricci_bound << " >= " << m - 2
            << " and is not the unit sphere, but lambda_1 = " << rep.lambda1 << " <= " << rep.threshold
            << "; discretization failure";
        throw ConsistencyError(msg.str());
    }
    return rep;
}

}  // namespace coniso
