#include "coniso/link_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace coniso {

namespace {

constexpr double kPi = std::numbers::pi;

double cap_area_fraction(int d, double theta) {
    // int_0^theta sin^{d-1} t dt / int_0^pi, Gauss-Legendre on [0, theta].
    static thread_local std::vector<double> x, w;
    if (x.empty()) gauss_legendre(64, x, w);
    auto integral = [&](double hi) {
        double s = 0.0;
        for (size_t q = 0; q < x.size(); ++q) {
            const double t = 0.5 * hi * (x[q] + 1.0);
            s += w[q] * std::pow(std::sin(t), d - 1);
        }
        return 0.5 * hi * s;
    };
    return integral(theta) / integral(kPi);
}

// Values of a coefficient vector on a latitude-longitude product grid,
// node index = i_theta * n_phi + i_phi. Separates the longitude sums so the
// cost is O(n_theta (N^2 + n_phi N)).
Eigen::VectorXd synth_latlon(int degree, const Eigen::VectorXd& coeff,
                             const std::vector<double>& thetas, const std::vector<double>& phis) {
    const int nt = static_cast<int>(thetas.size());
    const int np = static_cast<int>(phis.size());
    Eigen::VectorXd out(nt * np);
    const double rt2 = std::sqrt(2.0);
    std::vector<double> ak(degree + 1), bk(degree + 1);
    for (int i = 0; i < nt; ++i) {
        const LegendreTable L(degree, std::cos(thetas[i]), std::sin(thetas[i]), false);
        std::fill(ak.begin(), ak.end(), 0.0);
        std::fill(bk.begin(), bk.end(), 0.0);
        for (int l = 0; l <= degree; ++l) {
            ak[0] += L.p(l, 0) * coeff[SphereBasis::index(l, 0)];
            for (int k = 1; k <= l; ++k) {
                ak[k] += rt2 * L.p(l, k) * coeff[SphereBasis::index(l, k)];
                bk[k] += rt2 * L.p(l, k) * coeff[SphereBasis::index(l, -k)];
            }
        }
        for (int j = 0; j < np; ++j) {
            double f = ak[0];
            for (int k = 1; k <= degree; ++k)
                f += ak[k] * std::cos(k * phis[j]) + bk[k] * std::sin(k * phis[j]);
            out[i * np + j] = f;
        }
    }
    return out;
}

struct FineGrid {
    std::vector<double> thetas, phis;
    Eigen::VectorXd round_weight;   // per node
    Eigen::VectorXd phi_field;      // conformal factor values
    Eigen::VectorXd conf_weight;    // round_weight * e^{2 phi}
    double total_area = 0.0;

    FineGrid(const LinkMetric& link, int nt, int np) {
        std::vector<double> x, w;
        gauss_legendre(nt, x, w);
        thetas.resize(nt);
        for (int i = 0; i < nt; ++i) thetas[i] = std::acos(x[i]);
        phis.resize(np);
        for (int j = 0; j < np; ++j) phis[j] = 2.0 * kPi * j / np;
        round_weight.resize(nt * np);
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < np; ++j) round_weight[i * np + j] = w[i] * (2.0 * kPi / np);
        phi_field = synth_latlon(link.conformal_factor().degree(), link.conformal_factor().coeff(), thetas, phis);
        conf_weight = round_weight.cwiseProduct(phi_field.unaryExpr([](double p) { return std::exp(2.0 * p); }));
        total_area = conf_weight.sum();
    }

    int n_theta() const { return static_cast<int>(thetas.size()); }
    int n_phi() const { return static_cast<int>(phis.size()); }
};

// Threshold t such that the conformal area of {score >= t} is `target`.
// Nodes with (numerically) equal scores are aggregated before interpolating,
// so zonal fields with whole tied rings do not produce a staircase.
double threshold_for_fraction(const Eigen::VectorXd& score, const Eigen::VectorXd& weight, double target) {
    std::vector<int> idx(score.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return score[a] > score[b]; });

    std::vector<double> levels, cum;  // cumulative area at the *end* of each tie block
    double acc = 0.0;
    size_t k = 0;
    while (k < idx.size()) {
        const double v = score[idx[k]];
        double block = 0.0;
        while (k < idx.size() && score[idx[k]] >= v - 1e-13 * (1.0 + std::abs(v))) block += weight[idx[k++]];
        acc += block;
        levels.push_back(v);
        cum.push_back(acc);
    }
    if (target <= cum.front()) return levels.front();
    for (size_t b = 1; b < levels.size(); ++b) {
        if (cum[b] >= target) {
            const double frac = (target - cum[b - 1]) / (cum[b] - cum[b - 1]);
            return levels[b - 1] + frac * (levels[b] - levels[b - 1]);
        }
    }
    return levels.back();
}

struct CapCenter {
    Eigen::Vector3d dir, e1, e2;
};

double conformal_factor_at(const LinkMetric& link, double theta, double phi) {
    return link.conformal_factor().eval(theta, phi);
}

// Integral of e^{phi} over the round circle of radius t about `center` (the
// cap perimeter is sin(t) times this) and of e^{2 phi} (for the cap area
// density dA/dt = sin(t) times this).
void cap_ring_integrals(const LinkMetric& link, const CapCenter& center, double t, int samples,
                        double* e_phi, double* e_2phi) {
    double acc1 = 0.0, acc2 = 0.0;
    for (int q = 0; q < samples; ++q) {
        const double s = 2.0 * kPi * q / samples;
        const Eigen::Vector3d x =
            std::cos(t) * center.dir + std::sin(t) * (std::cos(s) * center.e1 + std::sin(s) * center.e2);
        const double th = std::acos(std::clamp(x[2], -1.0, 1.0));
        const double ph = std::atan2(x[1], x[0]);
        const double phi = conformal_factor_at(link, th, ph);
        if (e_phi) acc1 += std::exp(phi);
        if (e_2phi) acc2 += std::exp(2.0 * phi);
    }
    const double scale = 2.0 * kPi / samples;
    if (e_phi) *e_phi = scale * acc1;
    if (e_2phi) *e_2phi = scale * acc2;
}

// Cumulative conformal cap area about a center as a smooth function of the
// cap radius, tabulated on a uniform radius grid with locally quadratic
// integration, plus its density for inverting area targets.
struct CapAreaTable {
    std::vector<double> t, density, cumulative;

    CapAreaTable(const LinkMetric& link, const CapCenter& center, int n_t, int n_s) {
        t.resize(n_t + 1);
        density.resize(n_t + 1);
        cumulative.resize(n_t + 1);
        for (int i = 0; i <= n_t; ++i) {
            t[i] = kPi * i / n_t;
            double ring2 = 0.0;
            cap_ring_integrals(link, center, t[i], n_s, nullptr, &ring2);
            density[i] = std::sin(t[i]) * ring2;
        }
        cumulative[0] = 0.0;
        const double h = kPi / n_t;
        for (int i = 0; i < n_t; ++i) {
            // integral of the quadratic through (g_i, g_{i+1}, g_{i+2}) over [t_i, t_{i+1}]
            const double g0 = density[i], g1 = density[i + 1];
            const double inc = i + 2 <= n_t ? h * (5.0 * g0 + 8.0 * g1 - density[i + 2]) / 12.0
                                            : h * (-density[i - 1] + 8.0 * g0 + 5.0 * g1) / 12.0;
            cumulative[i + 1] = cumulative[i] + inc;
        }
    }

    double invert(double target) const {
        const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
        if (it == cumulative.begin()) return t.front();
        if (it == cumulative.end()) return t.back();
        const size_t i = static_cast<size_t>(it - cumulative.begin()) - 1;
        const double h = t[i + 1] - t[i];
        // local model A(t_i + x) = A_i + g_i x + (g_{i+1} - g_i) x^2 / (2h)
        double x = h * (target - cumulative[i]) / (cumulative[i + 1] - cumulative[i]);
        for (int iter = 0; iter < 4; ++iter) {
            const double g = density[i] + (density[i + 1] - density[i]) * x / h;
            if (g <= 0.0) break;
            const double a = cumulative[i] + density[i] * x + 0.5 * (density[i + 1] - density[i]) * x * x / h;
            x -= (a - target) / g;
            x = std::clamp(x, 0.0, h);
        }
        return t[i] + x;
    }
};

// Length of the level curve {psi = level} by marching squares on the fine
// grid extended by the two poles, measured in the conformal metric.
double level_set_perimeter(const LinkMetric& link, const FineGrid& fine, const Eigen::VectorXd& psi,
                           double psi_north, double psi_south, double level) {
    const int nt = fine.n_theta(), np = fine.n_phi();
    std::vector<double> rows_theta;
    rows_theta.reserve(nt + 2);
    rows_theta.push_back(0.0);
    for (double t : fine.thetas) rows_theta.push_back(t);
    rows_theta.push_back(kPi);
    auto value = [&](int row, int j) -> double {
        if (row == 0) return psi_north;
        if (row == nt + 1) return psi_south;
        return psi[(row - 1) * np + j];
    };

    double length = 0.0;
    const double dphi = 2.0 * kPi / np;
    for (int row = 0; row + 1 < static_cast<int>(rows_theta.size()); ++row) {
        const double t0 = rows_theta[row], t1 = rows_theta[row + 1];
        for (int j = 0; j < np; ++j) {
            const int j1 = (j + 1) % np;
            const double v00 = value(row, j) - level;
            const double v01 = value(row, j1) - level;
            const double v10 = value(row + 1, j) - level;
            const double v11 = value(row + 1, j1) - level;
            int pattern = (v00 > 0) | ((v01 > 0) << 1) | ((v10 > 0) << 2) | ((v11 > 0) << 3);
            if (pattern == 0 || pattern == 15) continue;

            // Edge crossings in local cell coordinates (u along theta, v along phi).
            auto cross = [](double a, double b) { return a / (a - b); };
            std::vector<std::pair<double, double>> pts;  // (u, v)
            if ((v00 > 0) != (v01 > 0)) pts.emplace_back(0.0, cross(v00, v01));
            if ((v10 > 0) != (v11 > 0)) pts.emplace_back(1.0, cross(v10, v11));
            if ((v00 > 0) != (v10 > 0)) pts.emplace_back(cross(v00, v10), 0.0);
            if ((v01 > 0) != (v11 > 0)) pts.emplace_back(cross(v01, v11), 1.0);
            if (pts.size() < 2) continue;

            auto segment = [&](const std::pair<double, double>& a, const std::pair<double, double>& b) {
                const double ua = t0 + a.first * (t1 - t0), ub = t0 + b.first * (t1 - t0);
                const double va = (j + a.second) * dphi, vb = (j + b.second) * dphi;
                const double tm = 0.5 * (ua + ub);
                const double pm = 0.5 * (va + vb);
                const double dth = ub - ua;
                const double dph = vb - va;
                const double conf = std::exp(conformal_factor_at(link, tm, pm));
                return conf * std::sqrt(dth * dth + std::sin(tm) * std::sin(tm) * dph * dph);
            };
            if (pts.size() == 2) {
                length += segment(pts[0], pts[1]);
            } else if (pts.size() == 4) {
                // Saddle: resolve by the cell-center sign.
                const double center = 0.25 * (v00 + v01 + v10 + v11);
                std::sort(pts.begin(), pts.end());
                if ((center > 0) == (v00 > 0)) {
                    length += segment(pts[0], pts[1]) + segment(pts[2], pts[3]);
                } else {
                    length += segment(pts[0], pts[2]) + segment(pts[1], pts[3]);
                }
            }
        }
    }
    return length;
}

std::vector<CapCenter> cap_centers(const LinkMetric& link) {
    std::vector<CapCenter> centers;
    auto push = [&](double theta, double phi) {
        CapCenter c;
        c.dir = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
        // Orthonormal pair spanning the tangent plane at dir.
        Eigen::Vector3d up = std::abs(c.dir[2]) < 0.9 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(1, 0, 0);
        c.e1 = up.cross(c.dir).normalized();
        c.e2 = c.dir.cross(c.e1);
        centers.push_back(c);
    };
    push(1e-8, 0.0);        // the poles themselves
    push(kPi - 1e-8, 0.0);
    const SphereGrid& g = link.basis()->grid();
    for (int i = 0; i < g.n_theta; i += 4)
        for (int j = 0; j < g.n_phi; j += 6) push(g.theta[i], g.phi[j]);
    return centers;
}

std::vector<ProfileEstimate> conformal_profile(const LinkMetric& link, std::span<const double> betas) {
    const FineGrid fine(link, 96, 192);
    std::vector<ProfileEstimate> out(betas.size());
    for (size_t b = 0; b < betas.size(); ++b) {
        out[b].beta = betas[b];
        out[b].value = std::numeric_limits<double>::infinity();
        out[b].is_upper_bound = true;
    }

    // (a) geodesic caps of the round metric about a spread of centers
    const auto centers = cap_centers(link);
    for (const auto& center : centers) {
        const CapAreaTable table(link, center, 192, 128);
        for (size_t b = 0; b < betas.size(); ++b) {
            const double beta = betas[b];
            if (beta <= 0.0 || beta >= 1.0) continue;
            const double theta_c = table.invert(beta * fine.total_area);
            double ring1 = 0.0;
            cap_ring_integrals(link, center, theta_c, 256, &ring1, nullptr);
            const double val = std::sin(theta_c) * ring1 / fine.total_area;
            if (val < out[b].value) {
                out[b].value = val;
                out[b].method = ProfileMethod::CapCandidate;
            }
        }
    }

    // (b) level sets of the lowest nonconstant eigenfunctions
    const auto eb = laplace_eigenbasis(link, 7);
    for (size_t e = 1; e < eb.eigenfunctions.size(); ++e) {
        const Eigen::VectorXd& c = eb.eigenfunctions[e].coeff();
        const Eigen::VectorXd psi = synth_latlon(link.basis()->degree(), c, fine.thetas, fine.phis);
        const double psi_n = link.basis()->eval(c, 0.0, 0.0);
        const double psi_s = link.basis()->eval(c, kPi, 0.0);
        for (size_t b = 0; b < betas.size(); ++b) {
            const double beta = betas[b];
            if (beta <= 0.0 || beta >= 1.0) continue;
            const double level = threshold_for_fraction(psi, fine.conf_weight, beta * fine.total_area);
            const double val = level_set_perimeter(link, fine, psi, psi_n, psi_s, level) / fine.total_area;
            if (val < out[b].value) {
                out[b].value = val;
                out[b].method = ProfileMethod::LevelSetUpperBound;
            }
        }
    }

    for (size_t b = 0; b < betas.size(); ++b) {
        if (betas[b] <= 0.0 || betas[b] >= 1.0) {
            out[b].value = 0.0;
            out[b].method = ProfileMethod::CapExact;
            out[b].is_upper_bound = false;
        }
    }
    return out;
}

}  // namespace

double round_sphere_profile(int dim, double beta) {
    if (beta <= 0.0 || beta >= 1.0) return 0.0;
    if (dim == 2) return std::sqrt(beta * (1.0 - beta));
    // Solve the cap colatitude, then boundary area over total area.
    double lo = 0.0, hi = kPi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cap_area_fraction(dim, mid) < beta ? lo : hi) = mid;
    }
    const double theta_c = 0.5 * (lo + hi);
    return unit_sphere_area(dim - 1) * std::pow(std::sin(theta_c), dim - 1) / unit_sphere_area(dim);
}

ProfileEstimate iso_profile(const LinkMetric& link, double beta) {
    return iso_profile_batch(link, std::span<const double>(&beta, 1)).front();
}

std::vector<ProfileEstimate> iso_profile_batch(const LinkMetric& link, std::span<const double> betas) {
    for (double beta : betas)
        if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("iso_profile: beta outside [0, 1]");
    if (link.kind() == LinkKind::ScaledRoundSphere) {
        std::vector<ProfileEstimate> out(betas.size());
        for (size_t b = 0; b < betas.size(); ++b) {
            out[b].beta = betas[b];
            out[b].value = round_sphere_profile(link.dim(), betas[b]) / link.radius();
            out[b].method = ProfileMethod::CapExact;
            out[b].is_upper_bound = false;
        }
        return out;
    }
    return conformal_profile(link, betas);
}

}  // namespace coniso
