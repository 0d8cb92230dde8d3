#include "coniso/cmc_solver.hpp"

#include "coniso/dual.hpp"
#include "coniso/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace coniso {

namespace {

constexpr double kRootFourPi = 3.5449077018110318;  // sqrt(4 pi)

Eigen::VectorXd embed_coefficients(const SpectralField& f, const SphereBasis& into) {
    if (f.coeff().size() > into.size())
        throw std::invalid_argument("field truncation degree exceeds the link basis");
    Eigen::VectorXd c = Eigen::VectorXd::Zero(into.size());
    c.head(f.coeff().size()) = f.coeff();
    return c;
}

struct NodeData {
    double s[2];
    double ds[2][2];
    double sin_theta;
    double mu;  // link area density against the round unit-sphere measure
};

std::vector<NodeData> link_node_data(const LinkMetric& link) {
    const SphereBasis& basis = *link.basis();
    const SphereGrid& grid = basis.grid();
    std::vector<NodeData> out(grid.nodes());
    for (int n = 0; n < grid.nodes(); ++n) {
        const auto chart = link.chart_at_node(n, 1);
        NodeData& nd = out[n];
        for (int i = 0; i < 2; ++i) {
            nd.s[i] = chart.s[i];
            for (int j = 0; j < 2; ++j) nd.ds[i][j] = chart.ds[i][j];
        }
        nd.sin_theta = grid.sin_theta[grid.theta_index(n)];
        nd.mu = link.area_density(n);
    }
    return out;
}

// Pointwise graph curvature kernel, templated so the same formulas produce
// values (T = double) and the analytic jet with respect to the graph inputs
// (T = Dual<6>, seeds F, F_t, F_p, F_tt, F_tp, F_pp).
template <typename T>
struct KernelOut {
    T H, W, detG;
    T G[2][2], Gi[2][2], h[2][2];
    T nu0, nu[2];
    T hsq;
};

template <typename T>
KernelOut<T> eval_kernel(const NodeData& nd, const TermJet& aj, const TermJet& bj, const T& F, const T Fx[2],
                         const T Fxx[2][2]) {
    KernelOut<T> out;
    const T a = 1.0 + chain(F, aj.v, aj.dr);
    const T a_r = chain(F, aj.dr, aj.drr);
    const T a_x[2] = {chain(F, aj.dx[0], aj.drx[0]), chain(F, aj.dx[1], aj.drx[1])};
    const T b = 1.0 + chain(F, bj.v, bj.dr);
    const T b_r = chain(F, bj.dr, bj.drr);
    const T b_x[2] = {chain(F, bj.dx[0], bj.drx[0]), chain(F, bj.dx[1], bj.drx[1])};

    const T c = F * F * b;
    const T c_r = 2.0 * F * b + F * F * b_r;
    const T c_x[2] = {F * F * b_x[0], F * F * b_x[1]};

    // ambient diagonal entries at (F, x) and their coordinate partials
    T G[3], dG[3][3];
    G[0] = a;
    dG[0][0] = a_r;
    dG[0][1] = a_x[0];
    dG[0][2] = a_x[1];
    for (int i = 0; i < 2; ++i) {
        G[i + 1] = c * nd.s[i];
        dG[i + 1][0] = c_r * nd.s[i];
        for (int j = 0; j < 2; ++j) dG[i + 1][j + 1] = c_x[j] * nd.s[i] + c * nd.ds[i][j];
    }
    T gam[3][3][3];
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
            for (int s = 0; s < 3; ++s) {
                T num(0.0);
                if (p == q) num += dG[p][s];
                if (p == s) num += dG[p][q];
                if (q == s) num -= dG[q][p];
                gam[p][q][s] = num / (2.0 * G[p]);
            }

    T W2 = 1.0 / a;
    for (int k = 0; k < 2; ++k) W2 += Fx[k] * Fx[k] / (c * nd.s[k]);
    out.W = sqrt(W2);

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            out.G[i][j] = a * Fx[i] * Fx[j];
            if (i == j) out.G[i][j] += c * nd.s[i];
        }
    out.detG = out.G[0][0] * out.G[1][1] - out.G[0][1] * out.G[0][1];
    out.Gi[0][0] = out.G[1][1] / out.detG;
    out.Gi[1][1] = out.G[0][0] / out.detG;
    out.Gi[0][1] = out.Gi[1][0] = -out.G[0][1] / out.detG;

    auto gam_graph = [&](int p, int i, int j) {
        // Gamma^p contracted with the graph tangents e_i = d_i + F_i d_r
        return gam[p][0][0] * Fx[i] * Fx[j] + gam[p][0][j + 1] * Fx[i] + gam[p][i + 1][0] * Fx[j] +
               gam[p][i + 1][j + 1];
    };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            T v = Fxx[i][j] + gam_graph(0, i, j);
            for (int k = 0; k < 2; ++k) v -= Fx[k] * gam_graph(k + 1, i, j);
            out.h[i][j] = -v / out.W;
        }

    out.H = T(0.0);
    out.hsq = T(0.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            out.H += out.Gi[i][j] * out.h[i][j];
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    out.hsq += out.Gi[i][k] * out.Gi[j][l] * out.h[i][j] * out.h[k][l];
        }

    out.nu0 = 1.0 / (a * out.W);
    for (int k = 0; k < 2; ++k) out.nu[k] = -Fx[k] / (c * nd.s[k] * out.W);
    return out;
}

void check_graph_inside(const AsymptoticConeMetric& metric, const Eigen::VectorXd& F) {
    metric.require_inside(F.minCoeff());
    metric.require_inside(F.maxCoeff());
}

// Graph input tables (F and derivatives on the grid) from coefficients.
struct GraphTables {
    Eigen::VectorXd F;
    std::array<Eigen::VectorXd, 6> d;  // BasisDeriv order; d[0] == F
};

GraphTables graph_tables(const SphereBasis& basis, double rho, const Eigen::VectorXd& u_coeff) {
    GraphTables t;
    for (int w = 0; w < 6; ++w) {
        t.d[w] = rho * basis.synthesize(u_coeff, static_cast<BasisDeriv>(w));
        if (w == 0) t.d[w].array() += rho;  // F = rho (1 + u)
    }
    t.F = t.d[0];
    return t;
}

void check_graph_regularity(double detG, double G00) {
    if (!(detG > 0.0) || !(G00 > 0.0))
        throw std::invalid_argument("graph regularity lost: induced metric is not positive definite");
}

Eigen::VectorXd curvature_values(const AsymptoticConeMetric& metric, const std::vector<NodeData>& nodes,
                                 const GraphTables& t) {
    const int nn = static_cast<int>(nodes.size());
    Eigen::VectorXd H(nn);
    for (int n = 0; n < nn; ++n) {
        const double F = t.F[n];
        const double Fx[2] = {t.d[1][n], t.d[2][n]};
        const double Fxx[2][2] = {{t.d[3][n], t.d[4][n]}, {t.d[4][n], t.d[5][n]}};
        const auto out = eval_kernel<double>(nodes[n], metric.alpha_jet(F, n, 1), metric.beta_jet(F, n, 1), F,
                                             Fx, Fxx);
        check_graph_regularity(out.detG, out.G[0][0]);
        H[n] = out.H;
    }
    return H;
}

// Constant graphs over links of any dimension are slices; reuse the analytic
// slice formulas there.
double constant_graph_H(const AsymptoticConeMetric& metric, double radius) {
    const int d = metric.link().dim();
    const TermJet aj = metric.alpha_jet(radius, 0, 1);
    const TermJet bj = metric.beta_jet(radius, 0, 1);
    const double a = 1.0 + aj.v, b = 1.0 + bj.v;
    const double c = radius * radius * b;
    const double c_r = 2.0 * radius * b + radius * radius * bj.dr;
    return d * c_r / (2.0 * c * std::sqrt(a));
}

}  // namespace

RadialGraph::RadialGraph(double base_radius_, SpectralField u_) : base_radius(base_radius_), u(std::move(u_)) {
    if (!(base_radius > 0.0)) throw std::invalid_argument("RadialGraph: base radius must be positive");
    if (!(u.sup_norm() < 0.5))
        throw std::invalid_argument("RadialGraph: sup|u| must stay below 1/2 for graph regularity");
}

RadialGraph RadialGraph::slice(double radius, std::shared_ptr<const SphereBasis> basis) {
    return RadialGraph(radius, SpectralField::zero(std::move(basis)));
}

RadialGraph RadialGraph::constant(double base_radius, double offset) {
    return RadialGraph(base_radius, SpectralField::constant(make_basis(0, 1, 2), offset));
}

bool RadialGraph::is_constant() const {
    const auto& c = u.coeff();
    if (c.size() <= 1) return true;
    return c.tail(c.size() - 1).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + std::abs(c[0]));
}

GraphGeometry graph_geometry(const AsymptoticConeMetric& metric, const RadialGraph& graph) {
    const LinkMetric& link = metric.link();
    if (!link.has_basis())
        throw std::invalid_argument("graph_geometry: needs a 2-dimensional link");
    const auto& basis = link.basis();
    const Eigen::VectorXd u_coeff = embed_coefficients(graph.u, *basis);
    const GraphTables t = graph_tables(*basis, graph.base_radius, u_coeff);
    check_graph_inside(metric, t.F);

    const auto nodes = link_node_data(link);
    const int nn = static_cast<int>(nodes.size());
    GraphGeometry g;
    g.basis = basis;
    g.F = t.F;
    auto alloc = [&](Eigen::VectorXd& v) { v.resize(nn); };
    alloc(g.H);
    alloc(g.h_norm_sq);
    alloc(g.area_density);
    alloc(g.W);
    alloc(g.nu_r);
    alloc(g.nu_1);
    alloc(g.nu_2);
    alloc(g.G11);
    alloc(g.G12);
    alloc(g.G22);
    alloc(g.Gi11);
    alloc(g.Gi12);
    alloc(g.Gi22);
    for (auto& v : g.H_jet) alloc(v);

    using D6 = Dual<6>;
    for (int n = 0; n < nn; ++n) {
        const D6 F = D6::seed(t.F[n], 0);
        const D6 Fx[2] = {D6::seed(t.d[1][n], 1), D6::seed(t.d[2][n], 2)};
        const D6 Ftp = D6::seed(t.d[4][n], 4);
        const D6 Fxx[2][2] = {{D6::seed(t.d[3][n], 3), Ftp}, {Ftp, D6::seed(t.d[5][n], 5)}};
        const auto out = eval_kernel<D6>(nodes[n], metric.alpha_jet(t.F[n], n, 1), metric.beta_jet(t.F[n], n, 1),
                                         F, Fx, Fxx);
        check_graph_regularity(out.detG.v, out.G[0][0].v);
        g.H[n] = out.H.v;
        g.h_norm_sq[n] = out.hsq.v;
        g.W[n] = out.W.v;
        g.area_density[n] = std::sqrt(out.detG.v) / nodes[n].sin_theta;
        g.nu_r[n] = out.nu0.v;
        g.nu_1[n] = out.nu[0].v;
        g.nu_2[n] = out.nu[1].v;
        g.G11[n] = out.G[0][0].v;
        g.G12[n] = out.G[0][1].v;
        g.G22[n] = out.G[1][1].v;
        g.Gi11[n] = out.Gi[0][0].v;
        g.Gi12[n] = out.Gi[0][1].v;
        g.Gi22[n] = out.Gi[1][1].v;
        for (int s = 0; s < 6; ++s) g.H_jet[s][n] = out.H.d[s];
    }
    return g;
}

double GraphGeometry::area() const { return basis->weights().dot(area_density); }

double GraphGeometry::H_mean() const {
    const Eigen::VectorXd w = basis->weights().cwiseProduct(area_density);
    return w.dot(H) / w.sum();
}

double GraphGeometry::H_osc() const { return H.maxCoeff() - H.minCoeff(); }

SpectralField mean_curvature(const AsymptoticConeMetric& metric, const RadialGraph& graph) {
    const LinkMetric& link = metric.link();
    if (!link.has_basis()) {
        // Links of other dimensions carry constant perturbation fields, so
        // constant graphs are slices with closed-form curvature.
        if (!graph.is_constant())
            throw std::invalid_argument("mean_curvature: non-constant graphs need a 2-dimensional link");
        const double radius = graph.base_radius * (1.0 + graph.u.values()[0]);
        metric.require_inside(radius);
        return SpectralField::constant(graph.u.basis(), constant_graph_H(metric, radius));
    }
    const auto& basis = link.basis();
    const Eigen::VectorXd u_coeff = embed_coefficients(graph.u, *basis);
    const GraphTables t = graph_tables(*basis, graph.base_radius, u_coeff);
    check_graph_inside(metric, t.F);
    const auto nodes = link_node_data(link);
    return SpectralField::from_values(basis, curvature_values(metric, nodes, t));
}

SpectralField linearization_apply(const AsymptoticConeMetric& metric, const RadialGraph& graph,
                                  const SpectralField& v) {
    const LinkMetric& link = metric.link();
    if (!link.has_basis())
        throw std::invalid_argument("linearization_apply: needs a 2-dimensional link");
    const GraphGeometry g = graph_geometry(metric, graph);
    const auto& basis = link.basis();
    const Eigen::VectorXd v_coeff = embed_coefficients(v, *basis);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis->grid().nodes());
    for (int s = 0; s < 6; ++s) {
        const Eigen::VectorXd dv = graph.base_radius * basis->synthesize(v_coeff, static_cast<BasisDeriv>(s));
        out += g.H_jet[s].cwiseProduct(dv);
    }
    return SpectralField::from_values(basis, out);
}

double enclosed_volume(const AsymptoticConeMetric& metric, const RadialGraph& graph) {
    const LinkMetric& link = metric.link();
    const int d = link.dim();
    const int m = d + 1;
    const double core = area(link) * std::pow(metric.r_min(), m) / m;

    static thread_local std::vector<double> qx, qw;
    if (qx.empty()) gauss_legendre(24, qx, qw);
    auto radial = [&](int node, double upper, auto&& density) {
        const double lo = metric.r_min();
        const int panels = std::max(2, static_cast<int>(std::ceil(2.0 * std::log2(upper / lo))));
        double acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = lo * std::pow(upper / lo, static_cast<double>(p) / panels);
            const double b = lo * std::pow(upper / lo, static_cast<double>(p + 1) / panels);
            for (size_t q = 0; q < qx.size(); ++q) {
                const double r = 0.5 * (a + b) + 0.5 * (b - a) * qx[q];
                acc += 0.5 * (b - a) * qw[q] * density(node, r);
            }
        }
        return acc;
    };

    if (!link.has_basis()) {
        if (!graph.is_constant())
            throw std::invalid_argument("enclosed_volume: non-constant graphs need a 2-dimensional link");
        const double upper = graph.base_radius * (1.0 + graph.u.values()[0]);
        metric.require_inside(upper);
        if (metric.exact()) return area(link) * std::pow(upper, m) / m;
        auto density = [&](int, double r) {
            const double a = 1.0 + metric.alpha_jet(r, 0, 0).v;
            const double b = 1.0 + metric.beta_jet(r, 0, 0).v;
            return area(link) * std::sqrt(a) * std::pow(b, 0.5 * d) * std::pow(r, d);
        };
        return core + radial(0, upper, density);
    }

    const auto& basis = link.basis();
    const Eigen::VectorXd u_coeff = embed_coefficients(graph.u, *basis);
    const Eigen::VectorXd F =
        graph.base_radius * (basis->synthesize(u_coeff).array() + 1.0).matrix();
    check_graph_inside(metric, F);
    if (metric.exact()) {
        double acc = 0.0;
        for (int n = 0; n < basis->grid().nodes(); ++n)
            acc += basis->weights()[n] * link.area_density(n) * std::pow(F[n], m) / m;
        return acc;
    }
    auto density = [&](int node, double r) {
        const double a = 1.0 + metric.alpha_jet(r, node, 0).v;
        const double b = 1.0 + metric.beta_jet(r, node, 0).v;
        return std::sqrt(a) * b * r * r;  // d == 2
    };
    double acc = core;
    for (int n = 0; n < basis->grid().nodes(); ++n)
        acc += basis->weights()[n] * link.area_density(n) * radial(n, F[n], density);
    return acc;
}

// ------------------------------------------------------------------ solver

namespace {

void require_spectral_gap(const AsymptoticConeMetric& metric, const char* who) {
    const auto rep = lichnerowicz_check(metric.link());
    if (!rep.passes) {
        std::ostringstream msg;
        msg << who << ": hypothesis lambda_1(-Delta_L) > m-1 violated (lambda_1 = " << rep.lambda1
            << ", m-1 = " << rep.threshold << "); the linearized operator is not invertible";
        throw HypothesisError(msg.str());
    }
}

Eigen::VectorXd volume_gradient(const AsymptoticConeMetric& metric, const std::vector<NodeData>& nodes,
                                const SphereBasis& basis, double rho, const Eigen::VectorXd& F) {
    // dV/du(node) scaled into coefficient space by the synthesis matrix.
    const int nn = static_cast<int>(nodes.size());
    Eigen::VectorXd bynode(nn);
    for (int n = 0; n < nn; ++n) {
        const double a = 1.0 + metric.alpha_jet(F[n], n, 0).v;
        const double b = 1.0 + metric.beta_jet(F[n], n, 0).v;
        bynode[n] = basis.weights()[n] * nodes[n].mu * std::sqrt(a) * b * F[n] * F[n] * rho;
    }
    return basis.table(BasisDeriv::Value).transpose() * bynode;
}

}  // namespace

SolveResult solve_cmc(const AsymptoticConeMetric& metric, const CmcTarget& target, const RadialGraph& initial,
                      const SolveOptions& options) {
    const LinkMetric& link = metric.link();
    if (!link.has_basis()) throw std::invalid_argument("solve_cmc: needs a 2-dimensional link");
    require_spectral_gap(metric, "solve_cmc");

    const auto& basis = link.basis();
    const int nb = basis->size();
    const auto nodes = link_node_data(link);
    const bool volume_mode = target.kind == CmcTarget::Kind::Volume;

    double rho = initial.base_radius;
    if (volume_mode) {
        rho = ball_volume_radius(metric, target.value);
    } else {
        const double natural = (metric.ambient_dim() - 1.0) / rho;
        if (!(target.value > 0.5 * natural) || !(target.value < 2.0 * natural))
            throw std::invalid_argument(
                "solve_cmc: target mean curvature must lie within a factor 2 of (m-1)/base_radius");
    }
    const double v_scale = volume_mode ? std::max(1.0, target.value) : 1.0;

    Eigen::VectorXd c = embed_coefficients(initial.u, *basis);
    double H0 = volume_mode ? 0.0 : target.value;

    struct State {
        Eigen::VectorXd H_values;
        double volume = 0.0;
        double sup_residual = 0.0;
    };
    auto evaluate = [&](const Eigen::VectorXd& coeff, double H0_cur) {
        State st;
        const GraphTables t = graph_tables(*basis, rho, coeff);
        check_graph_inside(metric, t.F);
        st.H_values = curvature_values(metric, nodes, t);
        st.sup_residual = (st.H_values.array() - H0_cur).abs().maxCoeff();
        if (volume_mode) {
            st.volume = enclosed_volume(metric, RadialGraph(rho, SpectralField::from_coefficients(basis, coeff)));
            st.sup_residual = std::max(st.sup_residual, std::abs(st.volume - target.value) / v_scale);
        }
        return st;
    };

    if (volume_mode) {
        // initialize the unknown constant from the initial graph
        const GraphTables t0 = graph_tables(*basis, rho, c);
        check_graph_inside(metric, t0.F);
        H0 = curvature_values(metric, nodes, t0).mean();
    }

    State st = evaluate(c, H0);
    std::vector<double> history{st.sup_residual};
    int iterations = 0;
    bool converged = st.sup_residual <= options.tolerance;

    auto newton_step = [&](const State& cur) {
        // Jacobian from the analytic curvature jet.
        const GraphGeometry g =
            graph_geometry(metric, RadialGraph(rho, SpectralField::from_coefficients(basis, c)));
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis->grid().nodes(), nb);
        for (int s = 0; s < 6; ++s)
            M += g.H_jet[s].asDiagonal() * basis->table(static_cast<BasisDeriv>(s));
        const Eigen::MatrixXd JH =
            basis->table(BasisDeriv::Value).transpose() * basis->weights().asDiagonal() * M * rho;

        std::pair<Eigen::VectorXd, double> step{Eigen::VectorXd(), 0.0};
        if (!volume_mode) {
            Eigen::VectorXd res = basis->analyze(cur.H_values);
            res[0] -= H0 * kRootFourPi;
            step.first = JH.partialPivLu().solve(res);
        } else {
            Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nb + 1, nb + 1);
            J.topLeftCorner(nb, nb) = JH;
            J(0, nb) = -kRootFourPi;  // -d/dH0 of the constant-mode residual
            J.block(nb, 0, 1, nb) = volume_gradient(metric, nodes, *basis, rho, g.F).transpose() / v_scale;
            Eigen::VectorXd res(nb + 1);
            res.head(nb) = basis->analyze(cur.H_values);
            res[0] -= H0 * kRootFourPi;
            res[nb] = (cur.volume - target.value) / v_scale;
            const Eigen::VectorXd full = J.partialPivLu().solve(res);
            step.first = full.head(nb);
            step.second = full[nb];
        }
        return step;
    };

    for (int it = 0; it < options.max_iterations && !converged; ++it) {
        const auto [step_c, step_H0] = newton_step(st);

        // Backtracking damping on the sup-residual.
        double damping = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= options.max_backtracks; ++bt) {
            const Eigen::VectorXd c_trial = c - damping * step_c;
            const double H0_trial = H0 - damping * step_H0;
            if (basis->synthesize(c_trial).cwiseAbs().maxCoeff() < 0.5) {
                State trial;
                try {
                    trial = evaluate(c_trial, H0_trial);
                } catch (const std::invalid_argument&) {
                    damping *= 0.5;
                    continue;
                }
                if (trial.sup_residual < st.sup_residual) {
                    c = c_trial;
                    H0 = H0_trial;
                    st = trial;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        ++iterations;
        history.push_back(st.sup_residual);
        if (!accepted)
            throw SolverError("solve_cmc: Newton iteration stalled (no damping step reduced the residual)",
                              history);
        converged = st.sup_residual <= options.tolerance;
    }
    if (!converged)
        throw SolverError("solve_cmc: Newton iteration failed to reach tolerance within the iteration budget",
                          history);

    // One full polishing step sharpens the converged iterate to roundoff, so
    // independently obtained solutions of the same leaf agree far below the
    // stopping tolerance.
    if (st.sup_residual > 1e-14 && iterations < options.max_iterations) {
        const auto [step_c, step_H0] = newton_step(st);
        const Eigen::VectorXd c_trial = c - step_c;
        const double H0_trial = H0 - step_H0;
        if (basis->synthesize(c_trial).cwiseAbs().maxCoeff() < 0.5) {
            try {
                const State trial = evaluate(c_trial, H0_trial);
                if (trial.sup_residual < st.sup_residual) {
                    c = c_trial;
                    H0 = H0_trial;
                    st = trial;
                    ++iterations;
                    history.push_back(st.sup_residual);
                }
            } catch (const std::invalid_argument&) {
            }
        }
    }

    RadialGraph leaf(rho, SpectralField::from_coefficients(basis, c));
    SolveResult result{leaf, {}, H0, iterations, history};

    LeafDiagnostics& diag = result.diagnostics;
    diag.enclosed_volume = volume_mode ? st.volume : enclosed_volume(metric, leaf);
    diag.H_mean = H0;
    diag.H_osc = st.H_values.maxCoeff() - st.H_values.minCoeff();
    diag.sup_u = leaf.sup_u();
    const double v0_radius = 4.0 * metric.r_min();
    const double v0 = v0_radius < metric.r_max() ? ball_volume(metric, v0_radius) : 0.0;
    diag.within_uniqueness_band = diag.sup_u <= 0.25 && diag.enclosed_volume >= v0;
    if (options.with_spectrum) {
        const JacobiSpectrum js = jacobi_spectrum(metric, leaf, options.jacobi_count);
        diag.jacobi_eigenvalues = js.eigenvalues;
        diag.lowest_vp_eigenvalue = js.lowest;
        diag.vp_stable = js.vp_stable;
    }
    return result;
}

FoliationResult foliate(const AsymptoticConeMetric& metric, std::span<const double> volumes,
                        const SolveOptions& options) {
    FoliationResult out;
    if (volumes.empty()) throw std::invalid_argument("foliate: empty volume grid");
    for (size_t i = 1; i < volumes.size(); ++i)
        if (!(volumes[i] > volumes[i - 1])) throw std::invalid_argument("foliate: volumes must be ascending");
    require_spectral_gap(metric, "foliate");
    const auto& basis = metric.link().basis();

    for (size_t i = 0; i < volumes.size(); ++i) {
        // continuation: previous leaf rescaled to the next base radius
        SpectralField u0 = out.leaves.empty() ? SpectralField::zero(basis) : out.leaves.back().leaf.u;
        try {
            const RadialGraph initial(ball_volume_radius(metric, volumes[i]), u0);
            out.leaves.push_back(solve_cmc(metric, CmcTarget::volume(volumes[i]), initial, options));
        } catch (const std::exception& e) {
            out.error = e.what();
            out.completed = false;
            return out;
        }
    }
    out.completed = true;

    FoliationReport& rep = out.report;
    rep.min_gap = std::numeric_limits<double>::infinity();
    rep.nested = true;
    rep.H_strictly_decreasing = true;
    rep.sup_u_decreasing = true;
    rep.all_vp_stable = true;
    Eigen::VectorXd prev_F;
    for (size_t i = 0; i < out.leaves.size(); ++i) {
        const auto& lf = out.leaves[i];
        rep.volumes.push_back(lf.diagnostics.enclosed_volume);
        rep.radii.push_back(lf.leaf.base_radius);
        rep.sup_u.push_back(lf.diagnostics.sup_u);
        rep.H0.push_back(lf.H0);
        rep.lowest_vp.push_back(lf.diagnostics.lowest_vp_eigenvalue);
        rep.all_vp_stable = rep.all_vp_stable && lf.diagnostics.vp_stable;
        Eigen::VectorXd F =
            lf.leaf.base_radius * (basis->synthesize(embed_coefficients(lf.leaf.u, *basis)).array() + 1.0).matrix();
        if (i > 0) {
            const double gap = (F - prev_F).minCoeff();
            rep.min_gap = std::min(rep.min_gap, gap);
            if (!(gap > 0.0)) rep.nested = false;
            if (!(rep.H0[i] < rep.H0[i - 1])) rep.H_strictly_decreasing = false;
            if (!(rep.sup_u[i] <= rep.sup_u[i - 1] + 1e-14)) rep.sup_u_decreasing = false;
        }
        prev_F = F;
    }
    if (out.leaves.size() >= 2) {
        bool positive = true;
        for (double s : rep.sup_u) positive = positive && s > 1e-13;
        if (positive) {
            // least-squares slope of log sup_u against log radius
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const int n = static_cast<int>(rep.sup_u.size());
            for (int i = 0; i < n; ++i) {
                const double x = std::log(rep.radii[i]), y = std::log(rep.sup_u[i]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            rep.sup_u_loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        }
    }
    return out;
}

JacobiSpectrum jacobi_spectrum(const AsymptoticConeMetric& metric, const RadialGraph& graph, int count) {
    if (count < 2) throw std::invalid_argument("jacobi_spectrum: count must be >= 2");
    const LinkMetric& link = metric.link();
    const int m = metric.ambient_dim();

    if (!link.has_basis()) {
        if (!metric.exact() || !graph.is_constant())
            throw std::invalid_argument(
                "jacobi_spectrum: links of dimension != 2 support exact-cone slices only");
        const double s = graph.base_radius * (1.0 + graph.u.values()[0]);
        metric.require_inside(s);
        // closed form: (lambda_k - (m-1)) / s^2 over the mean-zero space
        const auto lambda = laplace_spectrum(link, count + 1);
        JacobiSpectrum js;
        for (int k = 1; k <= count; ++k) js.eigenvalues.push_back((lambda[k] - (m - 1.0)) / (s * s));
        js.lowest = js.eigenvalues.front();
        js.vp_stable = js.lowest >= -1e-8;
        return js;
    }

    const auto& basis = link.basis();
    const int nb = basis->size();
    if (count > nb - 1) throw std::invalid_argument("jacobi_spectrum: count exceeds the Galerkin space");
    const GraphGeometry g = graph_geometry(metric, graph);
    if (g.H_osc() > 1e-4)
        throw std::invalid_argument("jacobi_spectrum: graph is not an accepted leaf (H oscillation too large)");

    // potential q = |h|^2 + Ric(nu, nu), ambient Ricci by finite differences
    const SphereGrid& grid = basis->grid();
    Eigen::VectorXd q(grid.nodes());
    for (int n = 0; n < grid.nodes(); ++n) {
        const std::vector<double> point = {g.F[n], grid.theta[grid.theta_index(n)], grid.phi[grid.phi_index(n)]};
        const std::vector<double> nu = {g.nu_r[n], g.nu_1[n], g.nu_2[n]};
        q[n] = g.h_norm_sq[n] + numeric_ricci(metric, point, nu, nu);
    }

    const Eigen::VectorXd w = basis->weights().cwiseProduct(g.area_density);
    const auto& T0 = basis->table(BasisDeriv::Value);
    const auto& Tt = basis->table(BasisDeriv::Theta);
    const auto& Tp = basis->table(BasisDeriv::Phi);
    Eigen::MatrixXd S = Tt.transpose() * (w.cwiseProduct(g.Gi11)).asDiagonal() * Tt +
                        Tt.transpose() * (w.cwiseProduct(g.Gi12)).asDiagonal() * Tp +
                        Tp.transpose() * (w.cwiseProduct(g.Gi12)).asDiagonal() * Tt +
                        Tp.transpose() * (w.cwiseProduct(g.Gi22)).asDiagonal() * Tp;
    const Eigen::MatrixXd P = T0.transpose() * (w.cwiseProduct(q)).asDiagonal() * T0;
    const Eigen::MatrixXd Mass = T0.transpose() * w.asDiagonal() * T0;
    const Eigen::MatrixXd K = S - P;

    // restrict to the mean-zero subspace: v . c = 0 with v_a = integral of Y_a
    const Eigen::VectorXd v = T0.transpose() * w;
    Eigen::VectorXd hh = v.normalized();
    hh[0] -= 1.0;  // Householder vector mapping e_0 to v/|v|
    Eigen::MatrixXd Q;
    if (hh.norm() < 1e-14) {
        Q = Eigen::MatrixXd::Identity(nb, nb).rightCols(nb - 1);
    } else {
        hh.normalize();
        const Eigen::MatrixXd Hh = Eigen::MatrixXd::Identity(nb, nb) - 2.0 * hh * hh.transpose();
        Q = Hh.rightCols(nb - 1);
    }
    const Eigen::MatrixXd Kr = Q.transpose() * K * Q;
    const Eigen::MatrixXd Mr = Q.transpose() * Mass * Q;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (Kr + Kr.transpose()),
                                                                     0.5 * (Mr + Mr.transpose()));
    if (solver.info() != Eigen::Success)
        throw SolverError("jacobi_spectrum: generalized eigensolver failed to converge");

    JacobiSpectrum js;
    for (int k = 0; k < count; ++k) js.eigenvalues.push_back(solver.eigenvalues()[k]);
    js.lowest = js.eigenvalues.front();
    js.vp_stable = js.lowest >= -1e-8;
    return js;
}

}  // namespace coniso
