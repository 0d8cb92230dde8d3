// Finite-difference curvature oracle. Everything here is derived from metric
// component values alone (AsymptoticConeMetric::metric_diag), so it stays an
// independent cross-check for the closed-form curvature code.
#include "coniso/cone_metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace coniso {

namespace {

Eigen::MatrixXd metric_matrix(const AsymptoticConeMetric& metric, std::span<const double> point) {
    const int m = metric.ambient_dim();
    std::vector<double> diag(m);
    metric.metric_diag(point, diag);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) g(i, i) = diag[i];
    return g;
}

Eigen::MatrixXd ricci_single_step(const AsymptoticConeMetric& metric, std::span<const double> point,
                                  const std::vector<double>& h) {
    const int m = metric.ambient_dim();
    std::vector<double> p(point.begin(), point.end());
    auto shifted = [&](int s, double ds, int t, double dt) {
        std::vector<double> q = p;
        q[s] += ds;
        if (t >= 0) q[t] += dt;
        return metric_matrix(metric, q);
    };

    const Eigen::MatrixXd g0 = metric_matrix(metric, point);
    std::vector<Eigen::MatrixXd> dg(m), gp(m), gm(m);
    for (int s = 0; s < m; ++s) {
        gp[s] = shifted(s, h[s], -1, 0.0);
        gm[s] = shifted(s, -h[s], -1, 0.0);
        dg[s] = (gp[s] - gm[s]) / (2.0 * h[s]);
    }
    std::vector<std::vector<Eigen::MatrixXd>> ddg(m, std::vector<Eigen::MatrixXd>(m));
    for (int s = 0; s < m; ++s) {
        ddg[s][s] = (gp[s] - 2.0 * g0 + gm[s]) / (h[s] * h[s]);
        for (int t = s + 1; t < m; ++t) {
            ddg[s][t] = (shifted(s, h[s], t, h[t]) - shifted(s, h[s], t, -h[t]) - shifted(s, -h[s], t, h[t]) +
                         shifted(s, -h[s], t, -h[t])) /
                        (4.0 * h[s] * h[t]);
            ddg[t][s] = ddg[s][t];
        }
    }

    const Eigen::MatrixXd ginv = g0.inverse();
    std::vector<Eigen::MatrixXd> dginv(m);
    for (int s = 0; s < m; ++s) dginv[s] = -ginv * dg[s] * ginv;

    auto gamma = [&](int p_, int q_, int s_) {
        double v = 0.0;
        for (int k = 0; k < m; ++k)
            v += ginv(p_, k) * (dg[q_](k, s_) + dg[s_](k, q_) - dg[k](q_, s_));
        return 0.5 * v;
    };
    auto dgamma = [&](int t, int p_, int q_, int s_) {
        double v = 0.0;
        for (int k = 0; k < m; ++k) {
            v += dginv[t](p_, k) * (dg[q_](k, s_) + dg[s_](k, q_) - dg[k](q_, s_));
            v += ginv(p_, k) * (ddg[t][q_](k, s_) + ddg[t][s_](k, q_) - ddg[t][k](q_, s_));
        }
        return 0.5 * v;
    };

    Eigen::MatrixXd ric(m, m);
    for (int mu = 0; mu < m; ++mu) {
        for (int nu = 0; nu < m; ++nu) {
            double v = 0.0;
            for (int l = 0; l < m; ++l) {
                v += dgamma(l, l, mu, nu) - dgamma(nu, l, mu, l);
                for (int s = 0; s < m; ++s)
                    v += gamma(l, l, s) * gamma(s, mu, nu) - gamma(l, nu, s) * gamma(s, mu, l);
            }
            ric(mu, nu) = v;
        }
    }
    return ric;
}

std::vector<double> fd_steps(const AsymptoticConeMetric& metric, std::span<const double> point,
                             const FdOptions& options) {
    const int m = metric.ambient_dim();
    std::vector<double> h(m, options.relative_step);
    h[0] = options.relative_step * point[0];
    return h;
}

}  // namespace

Eigen::MatrixXd numeric_ricci_tensor(const AsymptoticConeMetric& metric, std::span<const double> point,
                                     const FdOptions& options) {
    const int m = metric.ambient_dim();
    if (static_cast<int>(point.size()) != m) throw std::invalid_argument("numeric_ricci: point size mismatch");
    std::vector<double> h = fd_steps(metric, point, options);
    metric.require_inside(point[0], 4.0 * h[0]);
    const Eigen::MatrixXd coarse = ricci_single_step(metric, point, h);
    if (!options.richardson) return coarse;
    for (double& step : h) step *= 0.5;
    const Eigen::MatrixXd fine = ricci_single_step(metric, point, h);
    return (4.0 * fine - coarse) / 3.0;
}

double numeric_ricci(const AsymptoticConeMetric& metric, std::span<const double> point,
                     std::span<const double> u, std::span<const double> v, const FdOptions& options) {
    const int m = metric.ambient_dim();
    if (static_cast<int>(u.size()) != m || static_cast<int>(v.size()) != m)
        throw std::invalid_argument("numeric_ricci: direction size mismatch");
    const Eigen::MatrixXd ric = numeric_ricci_tensor(metric, point, options);
    double out = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out += u[i] * ric(i, j) * v[j];
    return out;
}

double numeric_scalar_curvature(const AsymptoticConeMetric& metric, std::span<const double> point,
                                const FdOptions& options) {
    const int m = metric.ambient_dim();
    const Eigen::MatrixXd ric = numeric_ricci_tensor(metric, point, options);
    std::vector<double> diag(m);
    metric.metric_diag(point, diag);
    double out = 0.0;
    for (int i = 0; i < m; ++i) out += ric(i, i) / diag[i];
    return out;
}

}  // namespace coniso
