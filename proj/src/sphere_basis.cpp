#include "coniso/sphere_basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coniso {

namespace {
constexpr double kPi = std::numbers::pi;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    // Newton iteration on P_n from the Chebyshev-like initial guess; symmetric pairs.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int l = 0; l < n; ++l) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * l + 1.0) * x * p1 - l * p2) / (l + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 2.5e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

SphereGrid::SphereGrid(int nt, int np) : n_theta(nt), n_phi(np) {
    if (nt < 1 || np < 1) throw std::invalid_argument("SphereGrid: empty grid");
    gauss_legendre(nt, cos_theta, gl_weight);
    theta.resize(nt);
    sin_theta.resize(nt);
    for (int i = 0; i < nt; ++i) {
        theta[i] = std::acos(cos_theta[i]);
        sin_theta[i] = std::sin(theta[i]);
    }
    phi.resize(np);
    for (int j = 0; j < np; ++j) phi[j] = 2.0 * kPi * j / np;
}

double SphereGrid::weight(int node) const {
    return gl_weight[theta_index(node)] * (2.0 * kPi / n_phi);
}

LegendreTable::LegendreTable(int degree_, double ct, double st, bool with_derivatives)
    : degree(degree_),
      p(degree_ + 1, degree_ + 1),
      dp(with_derivatives ? degree_ + 1 : 0, with_derivatives ? degree_ + 1 : 0),
      ddp(with_derivatives ? degree_ + 1 : 0, with_derivatives ? degree_ + 1 : 0) {
    const int N = degree;
    p.setZero();
    p(0, 0) = std::sqrt(1.0 / (4.0 * kPi));
    for (int k = 1; k <= N; ++k)
        p(k, k) = st * std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * p(k - 1, k - 1);
    for (int k = 0; k < N; ++k)
        p(k + 1, k) = ct * std::sqrt(2.0 * k + 3.0) * p(k, k);
    for (int k = 0; k <= N; ++k) {
        for (int l = k + 2; l <= N; ++l) {
            const double ll = static_cast<double>(l), kk = static_cast<double>(k);
            const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - kk * kk));
            const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - kk * kk) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
            p(l, k) = a * (ct * p(l - 1, k) - b * p(l - 2, k));
        }
    }
    if (!with_derivatives) return;
    if (st <= 0.0) throw std::invalid_argument("LegendreTable: derivatives undefined at the poles");
    dp.setZero();
    ddp.setZero();
    const double cot = ct / st;
    for (int l = 0; l <= N; ++l) {
        for (int k = 0; k <= l; ++k) {
            const double ll = static_cast<double>(l), kk = static_cast<double>(k);
            double below = 0.0;
            if (l > k)  // e_{lk} P_{l-1,k} term vanishes identically when l == k
                below = std::sqrt((ll * ll - kk * kk) * (2.0 * ll + 1.0) / (2.0 * ll - 1.0)) * p(l - 1, k);
            dp(l, k) = ll * cot * p(l, k) - below / st;
            ddp(l, k) = -cot * dp(l, k) - (ll * (ll + 1.0) - kk * kk / (st * st)) * p(l, k);
        }
    }
}

SphereBasis::SphereBasis(int degree, int n_theta, int n_phi)
    : degree_(degree), grid_(n_theta, n_phi) {
    if (degree < 0) throw std::invalid_argument("SphereBasis: negative degree");
    if (n_theta < degree + 1 || n_phi < 2 * degree + 1)
        throw std::invalid_argument("SphereBasis: grid too coarse for exact quadrature");
    const int nb = size();
    const int nn = grid_.nodes();
    weights_.resize(nn);
    for (int n = 0; n < nn; ++n) weights_[n] = grid_.weight(n);

    for (auto& t : tables_) t.resize(nn, nb);
    const double rt2 = std::sqrt(2.0);
    std::vector<LegendreTable> leg;
    leg.reserve(n_theta);
    for (int i = 0; i < n_theta; ++i)
        leg.emplace_back(degree, grid_.cos_theta[i], grid_.sin_theta[i], true);

    for (int i = 0; i < n_theta; ++i) {
        const LegendreTable& L = leg[i];
        for (int j = 0; j < n_phi; ++j) {
            const int node = i * n_phi + j;
            const double ph = grid_.phi[j];
            for (int l = 0; l <= degree; ++l) {
                for (int k = -l; k <= l; ++k) {
                    const int a = index(l, k);
                    const int ka = std::abs(k);
                    const double P = L.p(l, ka), dP = L.dp(l, ka), ddP = L.ddp(l, ka);
                    double trig, dtrig, ddtrig, amp;
                    if (k == 0) {
                        amp = 1.0;
                        trig = 1.0;
                        dtrig = 0.0;
                        ddtrig = 0.0;
                    } else if (k > 0) {
                        amp = rt2;
                        trig = std::cos(k * ph);
                        dtrig = -k * std::sin(k * ph);
                        ddtrig = -k * k * trig;
                    } else {
                        amp = rt2;
                        trig = std::sin(ka * ph);
                        dtrig = ka * std::cos(ka * ph);
                        ddtrig = -ka * ka * trig;
                    }
                    tables_[0](node, a) = amp * P * trig;
                    tables_[1](node, a) = amp * dP * trig;
                    tables_[2](node, a) = amp * P * dtrig;
                    tables_[3](node, a) = amp * ddP * trig;
                    tables_[4](node, a) = amp * dP * dtrig;
                    tables_[5](node, a) = amp * P * ddtrig;
                }
            }
        }
    }
}

std::pair<int, int> SphereBasis::degree_order(int index) {
    const int l = static_cast<int>(std::floor(std::sqrt(static_cast<double>(index) + 0.5)));
    return {l, index - l * l - l};
}

Eigen::VectorXd SphereBasis::synthesize(const Eigen::VectorXd& coeff, BasisDeriv which) const {
    return table(which) * coeff;
}

Eigen::VectorXd SphereBasis::analyze(const Eigen::VectorXd& values) const {
    return table(BasisDeriv::Value).transpose() * weights_.cwiseProduct(values);
}

double SphereBasis::integrate(const Eigen::VectorXd& values) const {
    return weights_.dot(values);
}

void SphereBasis::eval_row(double theta, double phi, Eigen::VectorXd& row) const {
    row.resize(size());
    const LegendreTable L(degree_, std::cos(theta), std::sin(theta), false);
    const double rt2 = std::sqrt(2.0);
    for (int l = 0; l <= degree_; ++l) {
        row[index(l, 0)] = L.p(l, 0);
        for (int k = 1; k <= l; ++k) {
            row[index(l, k)] = rt2 * L.p(l, k) * std::cos(k * phi);
            row[index(l, -k)] = rt2 * L.p(l, k) * std::sin(k * phi);
        }
    }
}

double SphereBasis::eval(const Eigen::VectorXd& coeff, double theta, double phi) const {
    Eigen::VectorXd row;
    eval_row(theta, phi, row);
    return row.dot(coeff);
}

std::array<double, kBasisDerivCount> SphereBasis::eval_jet(const Eigen::VectorXd& coeff, double theta,
                                                           double phi) const {
    const LegendreTable L(degree_, std::cos(theta), std::sin(theta), true);
    const double rt2 = std::sqrt(2.0);
    std::array<double, kBasisDerivCount> out{};
    for (int l = 0; l <= degree_; ++l) {
        for (int k = -l; k <= l; ++k) {
            const double c = coeff[index(l, k)];
            if (c == 0.0) continue;
            const int ka = std::abs(k);
            double trig, dtrig, ddtrig, amp;
            if (k == 0) {
                amp = 1.0;
                trig = 1.0;
                dtrig = 0.0;
                ddtrig = 0.0;
            } else if (k > 0) {
                amp = rt2;
                trig = std::cos(k * phi);
                dtrig = -k * std::sin(k * phi);
                ddtrig = -k * k * trig;
            } else {
                amp = rt2;
                trig = std::sin(ka * phi);
                dtrig = ka * std::cos(ka * phi);
                ddtrig = -ka * ka * trig;
            }
            const double P = L.p(l, ka), dP = L.dp(l, ka), ddP = L.ddp(l, ka);
            out[0] += c * amp * P * trig;
            out[1] += c * amp * dP * trig;
            out[2] += c * amp * P * dtrig;
            out[3] += c * amp * ddP * trig;
            out[4] += c * amp * dP * dtrig;
            out[5] += c * amp * P * ddtrig;
        }
    }
    return out;
}

std::shared_ptr<const SphereBasis> make_basis(int degree) {
    return std::make_shared<SphereBasis>(degree);
}

std::shared_ptr<const SphereBasis> make_basis(int degree, int n_theta, int n_phi) {
    return std::make_shared<SphereBasis>(degree, n_theta, n_phi);
}

}  // namespace coniso
