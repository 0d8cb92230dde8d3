#include "coniso/cone_metrics.hpp"

#include "coniso/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace coniso {

namespace {
constexpr int kMaxAmbient = kMaxLinkDim + 1;
}

// ---------------------------------------------------------------- profiles

double RadialProfile::value(double r) const {
    switch (kind) {
        case ProfileKind::Power:
            return amplitude * std::pow(r, -tau);
        case ProfileKind::PowerLog:
            return amplitude * std::pow(r, -tau) * std::log(r);
        case ProfileKind::Bump: {
            const double s = (2.0 * r - (bump_lo + bump_hi)) / (bump_hi - bump_lo);
            if (std::abs(s) >= 1.0) return 0.0;
            return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
        }
    }
    return 0.0;
}

double RadialProfile::d1(double r) const {
    switch (kind) {
        case ProfileKind::Power:
            return -tau * amplitude * std::pow(r, -tau - 1.0);
        case ProfileKind::PowerLog:
            return amplitude * std::pow(r, -tau - 1.0) * (1.0 - tau * std::log(r));
        case ProfileKind::Bump: {
            const double s = (2.0 * r - (bump_lo + bump_hi)) / (bump_hi - bump_lo);
            if (std::abs(s) >= 1.0) return 0.0;
            const double q = 1.0 - s * s;
            const double f = amplitude * std::exp(1.0 - 1.0 / q);
            return -f * 2.0 * s / (q * q) * 2.0 / (bump_hi - bump_lo);
        }
    }
    return 0.0;
}

double RadialProfile::d2(double r) const {
    switch (kind) {
        case ProfileKind::Power:
            return tau * (tau + 1.0) * amplitude * std::pow(r, -tau - 2.0);
        case ProfileKind::PowerLog:
            return amplitude * std::pow(r, -tau - 2.0) * (tau * (tau + 1.0) * std::log(r) - 2.0 * tau - 1.0);
        case ProfileKind::Bump: {
            const double s = (2.0 * r - (bump_lo + bump_hi)) / (bump_hi - bump_lo);
            if (std::abs(s) >= 1.0) return 0.0;
            const double q = 1.0 - s * s;
            const double f = amplitude * std::exp(1.0 - 1.0 / q);
            const double fss = f * (4.0 * s * s / (q * q * q * q) - 2.0 / (q * q) - 8.0 * s * s / (q * q * q));
            const double ds = 2.0 / (bump_hi - bump_lo);
            return fss * ds * ds;
        }
    }
    return 0.0;
}

// ------------------------------------------------------------------ metric

AsymptoticConeMetric::AsymptoticConeMetric(LinkMetric link, double r_min, double r_max)
    : AsymptoticConeMetric(std::move(link), r_min, r_max, Perturbation{}, 1.0) {}

AsymptoticConeMetric::AsymptoticConeMetric(LinkMetric link, double r_min, double r_max, Perturbation pert,
                                           double decay_rate)
    : link_(std::move(link)), r_min_(r_min), r_max_(r_max), decay_rate_(decay_rate), pert_(std::move(pert)) {
    if (!(r_min > 0.0) || !(r_min < r_max))
        throw std::invalid_argument("AsymptoticConeMetric: need 0 < r_min < r_max");
    if (!(decay_rate > 0.0)) throw std::invalid_argument("AsymptoticConeMetric: decay rate must be positive");

    auto setup_tables = [&](const std::optional<PerturbationTerm>& term,
                            std::array<Eigen::VectorXd, kBasisDerivCount>& tables) {
        if (!term || !term->field) return;
        if (!link_.has_basis())
            throw std::invalid_argument("AsymptoticConeMetric: perturbation fields need a 2-dimensional link");
        if (term->field->degree() > link_.basis()->degree())
            throw std::invalid_argument("AsymptoticConeMetric: perturbation field degree exceeds link basis");
        // Embed the field coefficients into the link basis, then tabulate.
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(link_.basis()->size());
        coeff.head(term->field->coeff().size()) = term->field->coeff();
        for (int w = 0; w < kBasisDerivCount; ++w)
            tables[w] = link_.basis()->synthesize(coeff, static_cast<BasisDeriv>(w));
    };
    setup_tables(pert_.alpha, alpha_tables_);
    setup_tables(pert_.beta, beta_tables_);
    validate_positivity();
}

void AsymptoticConeMetric::validate_positivity() const {
    if (exact()) return;
    const int radial_samples = 64;
    const int nodes = link_.has_basis() ? link_.basis()->grid().nodes() : 1;
    for (int i = 0; i <= radial_samples; ++i) {
        const double r = r_min_ * std::pow(r_max_ / r_min_, static_cast<double>(i) / radial_samples);
        for (int n = 0; n < nodes; ++n) {
            const double a = 1.0 + alpha_jet(r, n, 0).v;
            const double b = 1.0 + beta_jet(r, n, 0).v;
            if (!(a > 0.5) || !(b > 0.5)) {
                std::ostringstream msg;
                msg << "AsymptoticConeMetric: positivity margin violated at r = " << r << " (1+alpha = " << a
                    << ", 1+beta = " << b << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

TermJet AsymptoticConeMetric::term_jet(const std::optional<PerturbationTerm>& term,
                                       const std::array<Eigen::VectorXd, kBasisDerivCount>* tables, double r,
                                       int node, int order) const {
    TermJet jet;
    if (!term) return jet;
    const double p = term->profile.value(r);
    const double p1 = order >= 1 ? term->profile.d1(r) : 0.0;
    const double p2 = order >= 1 ? term->profile.d2(r) : 0.0;
    if (!term->field) {
        jet.v = p;
        jet.dr = p1;
        jet.drr = p2;
        return jet;
    }
    const auto& t = *tables;
    const double f = t[0][node];
    jet.v = p * f;
    if (order < 1) return jet;
    jet.dr = p1 * f;
    jet.drr = p2 * f;
    const double ft = t[1][node], fp = t[2][node];
    jet.dx = {p * ft, p * fp};
    jet.drx = {p1 * ft, p1 * fp};
    if (order < 2) return jet;
    jet.dxx = {{{p * t[3][node], p * t[4][node]}, {p * t[4][node], p * t[5][node]}}};
    return jet;
}

TermJet AsymptoticConeMetric::alpha_jet(double r, int node, int order) const {
    return term_jet(pert_.alpha, &alpha_tables_, r, node, order);
}

TermJet AsymptoticConeMetric::beta_jet(double r, int node, int order) const {
    return term_jet(pert_.beta, &beta_tables_, r, node, order);
}

namespace {

double term_value_at(const std::optional<PerturbationTerm>& term, double r, std::span<const double> coords) {
    if (!term) return 0.0;
    const double p = term->profile.value(r);
    if (!term->field) return p;
    return p * term->field->eval(coords[0], coords[1]);
}

TermJet term_jet_at(const LinkMetric& link, const std::optional<PerturbationTerm>& term, double r,
                    std::span<const double> coords, int order) {
    TermJet jet;
    if (!term) return jet;
    const double p = term->profile.value(r);
    const double p1 = term->profile.d1(r);
    const double p2 = term->profile.d2(r);
    if (!term->field) {
        jet.v = p;
        jet.dr = p1;
        jet.drr = p2;
        return jet;
    }
    const auto j = link.basis()->eval_jet(term->field->coeff(), coords[0], coords[1]);
    jet.v = p * j[0];
    jet.dr = p1 * j[0];
    jet.drr = p2 * j[0];
    if (order >= 1) {
        jet.dx = {p * j[1], p * j[2]};
        jet.drx = {p1 * j[1], p1 * j[2]};
    }
    if (order >= 2) jet.dxx = {{{p * j[3], p * j[4]}, {p * j[4], p * j[5]}}};
    return jet;
}

}  // namespace

double AsymptoticConeMetric::alpha_at(double r, std::span<const double> coords) const {
    return term_value_at(pert_.alpha, r, coords);
}

double AsymptoticConeMetric::beta_at(double r, std::span<const double> coords) const {
    return term_value_at(pert_.beta, r, coords);
}

void AsymptoticConeMetric::metric_diag(std::span<const double> coords, std::span<double> out) const {
    const int m = ambient_dim();
    if (static_cast<int>(coords.size()) != m || static_cast<int>(out.size()) != m)
        throw std::invalid_argument("metric_diag: coordinate/output size mismatch");
    const double r = coords[0];
    if (!(r > 0.0)) throw std::invalid_argument("metric_diag: r must be positive");
    const auto link_coords = coords.subspan(1);
    const auto chart = link_.chart_at(link_coords, 0);
    const double a = 1.0 + alpha_at(r, link_coords);
    const double b = 1.0 + beta_at(r, link_coords);
    out[0] = a;
    for (int i = 0; i < m - 1; ++i) out[i + 1] = r * r * b * chart.s[i];
}

void AsymptoticConeMetric::christoffels(std::span<const double> coords,
                                        double gamma[kMaxAmbient][kMaxAmbient][kMaxAmbient]) const {
    const int d = link_.dim();
    const int m = d + 1;
    const double r = coords[0];
    const auto link_coords = coords.subspan(1);
    const auto chart = link_.chart_at(link_coords, 1);
    const TermJet aj = term_jet_at(link_, pert_.alpha, r, link_coords, 1);
    const TermJet bj = term_jet_at(link_, pert_.beta, r, link_coords, 1);

    // Diagonal entries G_p and their coordinate partials dG[p][s].
    double G[kMaxAmbient] = {};
    double dG[kMaxAmbient][kMaxAmbient] = {};
    const double a = 1.0 + aj.v, b = 1.0 + bj.v;
    G[0] = a;
    dG[0][0] = aj.dr;
    for (int s = 0; s < d; ++s) dG[0][s + 1] = s < 2 ? aj.dx[s] : 0.0;
    for (int i = 0; i < d; ++i) {
        G[i + 1] = r * r * b * chart.s[i];
        dG[i + 1][0] = (2.0 * r * b + r * r * bj.dr) * chart.s[i];
        for (int s = 0; s < d; ++s)
            dG[i + 1][s + 1] = r * r * ((s < 2 ? bj.dx[s] : 0.0) * chart.s[i] + b * chart.ds[i][s]);
    }
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            for (int s = 0; s < m; ++s) {
                double val = 0.0;
                if (p == q) val += dG[p][s];
                if (p == s) val += dG[p][q];
                if (q == s) val -= dG[q][p];
                gamma[p][q][s] = val / (2.0 * G[p]);
            }
}

void AsymptoticConeMetric::require_inside(double r, double margin) const {
    if (!(r - margin > r_min_) || !(r + margin < r_max_)) {
        std::ostringstream msg;
        msg << "radius " << r << " outside the annulus (" << r_min_ << ", " << r_max_ << ")"
            << (margin > 0.0 ? " with stencil margin" : "");
        throw std::invalid_argument(msg.str());
    }
}

// -------------------------------------------------------------- cone Ricci

double cone_ricci(const LinkMetric& link, double r, const ConeDirection& direction) {
    if (!(r > 0.0)) throw std::invalid_argument("cone_ricci: r must be positive");
    switch (direction.kind) {
        case ConeDirection::Kind::Radial:
        case ConeDirection::Kind::RadialTangentMixed:
            return 0.0;
        case ConeDirection::Kind::Tangent:
            break;
    }
    const int d = link.dim();
    const int m = d + 1;
    if (static_cast<int>(direction.link_point.size()) != d ||
        static_cast<int>(direction.tangent.size()) != d)
        throw std::invalid_argument("cone_ricci: tangent direction needs link point and components");
    const auto chart = link.chart_at(direction.link_point, 0);
    double norm_sq = 0.0;
    for (int i = 0; i < d; ++i) norm_sq += chart.s[i] * direction.tangent[i] * direction.tangent[i];
    if (!(norm_sq > 0.0)) throw std::invalid_argument("cone_ricci: tangent direction is null");

    // (Ric_L - (m-2) g_L)(X, X) / (r^2 |X|_{g_L}^2) for the supported links,
    // whose link Ricci is a pointwise multiple of g_L.
    double ric_factor;  // Ric_L = ric_factor * g_L
    if (link.kind() == LinkKind::ScaledRoundSphere) {
        ric_factor = (d - 1.0) / (link.radius() * link.radius());
    } else {
        const auto j = link.basis()->eval_jet(link.conformal_factor().coeff(), direction.link_point[0],
                                              direction.link_point[1]);
        const double st = std::sin(direction.link_point[0]);
        const double ct = std::cos(direction.link_point[0]);
        const double lap = j[3] + (ct / st) * j[1] + j[5] / (st * st);
        ric_factor = std::exp(-2.0 * j[0]) * (1.0 - lap);  // Gaussian curvature
    }
    return (ric_factor - (m - 2.0)) / (r * r);
}

// ------------------------------------------------------ radial field check

double radial_identity_check(const AsymptoticConeMetric& metric, std::span<const VectorSample> samples) {
    const int m = metric.ambient_dim();
    double sup = 0.0;
    double gamma[kMaxAmbient][kMaxAmbient][kMaxAmbient];
    std::vector<double> diag(m);
    for (const auto& sample : samples) {
        if (static_cast<int>(sample.point.size()) != m || static_cast<int>(sample.components.size()) != m)
            throw std::invalid_argument("radial_identity_check: sample size mismatch");
        const double r = sample.point[0];
        metric.christoffels(sample.point, gamma);
        metric.metric_diag(sample.point, diag);
        double norm_sq = 0.0;
        for (int mu = 0; mu < m; ++mu) {
            // (nabla_Y (r d_r))^mu = Y^0 delta^mu_0 + r Gamma^mu_{sigma 0} Y^sigma
            double v = (mu == 0 ? sample.components[0] : 0.0);
            for (int sigma = 0; sigma < m; ++sigma) v += r * gamma[mu][sigma][0] * sample.components[sigma];
            const double diff = v - sample.components[mu];
            norm_sq += diag[mu] * diff * diff;
        }
        sup = std::max(sup, std::sqrt(norm_sq));
    }
    return sup;
}

// ----------------------------------------------------------------- volumes

namespace {

// Integrand of the coordinate-ball volume at fixed radius: the integral over
// the link of sqrt(g_rr) (1+beta)^{d/2} r^d against the link measure. This is
// also the exact r-derivative of ball_volume (coarea factor).
double radial_volume_density(const AsymptoticConeMetric& metric, double r) {
    const LinkMetric& link = metric.link();
    const int d = link.dim();
    if (metric.exact()) return area(link) * std::pow(r, d);
    if (!link.has_basis()) {
        const double a = 1.0 + metric.alpha_jet(r, 0, 0).v;
        const double b = 1.0 + metric.beta_jet(r, 0, 0).v;
        return area(link) * std::sqrt(a) * std::pow(b, 0.5 * d) * std::pow(r, d);
    }
    const SphereBasis& basis = *link.basis();
    double acc = 0.0;
    for (int n = 0; n < basis.grid().nodes(); ++n) {
        const double a = 1.0 + metric.alpha_jet(r, n, 0).v;
        const double b = 1.0 + metric.beta_jet(r, n, 0).v;
        acc += basis.weights()[n] * link.area_density(n) * std::sqrt(a) * b * std::pow(r, d);
    }
    return acc;
}

// Composite Gauss-Legendre over geometric panels; spectrally accurate for the
// smooth integrands here.
double radial_integral(const AsymptoticConeMetric& metric, double lo, double hi) {
    if (hi <= lo) return 0.0;
    static thread_local std::vector<double> x, w;
    if (x.empty()) gauss_legendre(16, x, w);
    const int panels = std::max(4, static_cast<int>(std::ceil(2.0 * std::log2(hi / lo))) + 2);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo * std::pow(hi / lo, static_cast<double>(p) / panels);
        const double b = lo * std::pow(hi / lo, static_cast<double>(p + 1) / panels);
        for (size_t q = 0; q < x.size(); ++q) {
            const double r = 0.5 * (a + b) + 0.5 * (b - a) * x[q];
            total += 0.5 * (b - a) * w[q] * radial_volume_density(metric, r);
        }
    }
    return total;
}

}  // namespace

double ball_volume(const AsymptoticConeMetric& metric, double r) {
    if (!(r > metric.r_min()) || !(r <= metric.r_max()))
        throw std::invalid_argument("ball_volume: radius outside (r_min, r_max]");
    const int m = metric.ambient_dim();
    const double core = area(metric.link()) * std::pow(metric.r_min(), m) / m;
    if (metric.exact()) return area(metric.link()) * std::pow(r, m) / m;
    return core + radial_integral(metric, metric.r_min(), r);
}

double ball_volume_derivative(const AsymptoticConeMetric& metric, double r) {
    return radial_volume_density(metric, r);
}

double ball_volume_radius(const AsymptoticConeMetric& metric, double volume) {
    const int m = metric.ambient_dim();
    const double lo = metric.r_min() * (1.0 + 1e-12), hi = metric.r_max();
    const double vlo = ball_volume(metric, lo), vhi = ball_volume(metric, hi);
    if (!(volume > vlo) || !(volume > 0.0) || volume > vhi) {
        std::ostringstream msg;
        msg << "ball_volume_radius: volume " << volume << " outside the annulus range (" << vlo << ", " << vhi
            << "]";
        throw std::invalid_argument(msg.str());
    }
    double r = std::clamp(std::pow(m * volume / area(metric.link()), 1.0 / m), lo, hi);
    for (int it = 0; it < 60; ++it) {
        const double f = ball_volume(metric, r) - volume;
        if (std::abs(f) <= 1e-13 * std::max(1.0, volume)) return r;
        const double step = f / ball_volume_derivative(metric, r);
        r = std::clamp(r - step, lo, hi);
    }
    throw SolverError("ball_volume_radius: Newton iteration failed to converge");
}

// ------------------------------------------------------------------ slices

SliceData slice_data(const AsymptoticConeMetric& metric, double r) {
    metric.require_inside(r);
    const LinkMetric& link = metric.link();
    const int d = link.dim();
    SliceData out{r, 0.0, SpectralField::zero(make_basis(0, 1, 2)), SpectralField::zero(make_basis(0, 1, 2)), 0.0};

    if (!link.has_basis()) {
        const double a = 1.0 + metric.alpha_jet(r, 0, 1).v;
        const TermJet bj = metric.beta_jet(r, 0, 1);
        const double b = 1.0 + bj.v;
        const double c = r * r * b;
        const double c_r = 2.0 * r * b + r * r * bj.dr;
        const double H = d * c_r / (2.0 * c * std::sqrt(a));
        out.area = std::pow(c, 0.5 * d) * area(link);
        out.H_field = SpectralField::constant(make_basis(0, 1, 2), H);
        out.h_norm_sq_field = SpectralField::constant(make_basis(0, 1, 2), H * H / d);
        out.umbilicity_deviation = 0.0;
        return out;
    }

    const SphereBasis& basis = *link.basis();
    const int nn = basis.grid().nodes();
    Eigen::VectorXd H(nn), hsq(nn);
    double area_acc = 0.0, umb = 0.0;
    for (int n = 0; n < nn; ++n) {
        const double a = 1.0 + metric.alpha_jet(r, n, 1).v;
        const TermJet bj = metric.beta_jet(r, n, 1);
        const double b = 1.0 + bj.v;
        const double c = r * r * b;
        const double c_r = 2.0 * r * b + r * r * bj.dr;
        // h_ij = c_r s_i delta_ij / (2 sqrt(a)), G_ij = c s_i delta_ij
        const double ratio = c_r / (2.0 * c * std::sqrt(a));  // h relative to G
        H[n] = d * ratio;
        double hs = 0.0, dev = 0.0;
        for (int i = 0; i < d; ++i) {
            hs += ratio * ratio;
            const double t = ratio - H[n] / d;  // trace-free part, vanishes for slices
            dev += t * t;
        }
        hsq[n] = hs;
        umb = std::max(umb, std::sqrt(dev));
        area_acc += basis.weights()[n] * link.area_density(n) * c;
    }
    out.area = area_acc;
    out.H_field = SpectralField::from_values(link.basis(), H);
    out.h_norm_sq_field = SpectralField::from_values(link.basis(), hsq);
    out.umbilicity_deviation = umb;
    return out;
}

// -------------------------------------------------------------- decay norm

namespace {

struct DecayPointData {
    LinkMetric::ChartJet chart;
    TermJet aj, bj;
};

// Sum over orders l <= k of r^l |nabla^l D|_{g_C} at one link point, where
// D = g - g_C = alpha dr^2 + r^2 beta g_L and nabla is the cone connection.
double decay_value_at(const AsymptoticConeMetric& metric, int k, double r, const DecayPointData& pt) {
    const int d = metric.link().dim();
    const int m = d + 1;
    const auto& chart = pt.chart;
    const TermJet& aj = pt.aj;
    const TermJet& bj = pt.bj;

    auto dx = [](const TermJet& j, int a) { return a < 2 ? j.dx[a] : 0.0; };
    auto drx = [](const TermJet& j, int a) { return a < 2 ? j.drx[a] : 0.0; };
    auto dxx = [](const TermJet& j, int a, int b) { return (a < 2 && b < 2) ? j.dxx[a][b] : 0.0; };

    // D (diagonal), its first and second coordinate partials.
    double D[kMaxAmbient] = {};
    double dD[kMaxAmbient][kMaxAmbient] = {};
    double ddD[kMaxAmbient][kMaxAmbient][kMaxAmbient] = {};
    D[0] = aj.v;
    dD[0][0] = aj.dr;
    ddD[0][0][0] = aj.drr;
    for (int a = 0; a < d; ++a) {
        dD[0][a + 1] = dx(aj, a);
        ddD[0][0][a + 1] = ddD[0][a + 1][0] = drx(aj, a);
        for (int b = 0; b < d; ++b) ddD[0][a + 1][b + 1] = dxx(aj, a, b);
    }
    for (int i = 0; i < d; ++i) {
        const double s = chart.s[i];
        D[i + 1] = r * r * bj.v * s;
        dD[i + 1][0] = (2.0 * r * bj.v + r * r * bj.dr) * s;
        ddD[i + 1][0][0] = (2.0 * bj.v + 4.0 * r * bj.dr + r * r * bj.drr) * s;
        for (int a = 0; a < d; ++a) {
            dD[i + 1][a + 1] = r * r * (dx(bj, a) * s + bj.v * chart.ds[i][a]);
            const double mixed =
                (2.0 * r * dx(bj, a) + r * r * drx(bj, a)) * s + (2.0 * r * bj.v + r * r * bj.dr) * chart.ds[i][a];
            ddD[i + 1][0][a + 1] = ddD[i + 1][a + 1][0] = mixed;
            for (int b = 0; b < d; ++b)
                ddD[i + 1][a + 1][b + 1] =
                    r * r * (dxx(bj, a, b) * s + dx(bj, a) * chart.ds[i][b] + dx(bj, b) * chart.ds[i][a] +
                             bj.v * chart.dds[i][a][b]);
        }
    }

    // Cone metric entries, Christoffels, and their partials.
    double G[kMaxAmbient] = {};
    double dG[kMaxAmbient][kMaxAmbient] = {};
    double ddG[kMaxAmbient][kMaxAmbient][kMaxAmbient] = {};
    G[0] = 1.0;
    for (int i = 0; i < d; ++i) {
        G[i + 1] = r * r * chart.s[i];
        dG[i + 1][0] = 2.0 * r * chart.s[i];
        ddG[i + 1][0][0] = 2.0 * chart.s[i];
        for (int a = 0; a < d; ++a) {
            dG[i + 1][a + 1] = r * r * chart.ds[i][a];
            ddG[i + 1][0][a + 1] = ddG[i + 1][a + 1][0] = 2.0 * r * chart.ds[i][a];
            for (int b = 0; b < d; ++b) ddG[i + 1][a + 1][b + 1] = r * r * chart.dds[i][a][b];
        }
    }
    double Gam[kMaxAmbient][kMaxAmbient][kMaxAmbient] = {};
    double dGam[kMaxAmbient][kMaxAmbient][kMaxAmbient][kMaxAmbient] = {};
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
            for (int s = 0; s < m; ++s) {
                double num = 0.0;
                if (p == q) num += dG[p][s];
                if (p == s) num += dG[p][q];
                if (q == s) num -= dG[q][p];
                Gam[p][q][s] = num / (2.0 * G[p]);
                for (int t = 0; t < m; ++t) {
                    double dnum = 0.0;
                    if (p == q) dnum += ddG[p][s][t];
                    if (p == s) dnum += ddG[p][q][t];
                    if (q == s) dnum -= ddG[q][p][t];
                    dGam[t][p][q][s] = dnum / (2.0 * G[p]) - Gam[p][q][s] * dG[p][t] / G[p];
                }
            }

    // |D|, |nabla D|, |nabla^2 D| with the diagonal inverse metric.
    double inv[kMaxAmbient];
    for (int p = 0; p < m; ++p) inv[p] = 1.0 / G[p];

    double total = 0.0;
    {
        double nsq = 0.0;
        for (int p = 0; p < m; ++p) nsq += inv[p] * inv[p] * D[p] * D[p];
        total += std::sqrt(nsq);
    }
    if (k < 1) return total;

    double T1[kMaxAmbient][kMaxAmbient][kMaxAmbient] = {};
    for (int s = 0; s < m; ++s)
        for (int mu = 0; mu < m; ++mu)
            for (int nu = 0; nu < m; ++nu) {
                double v = (mu == nu) ? dD[mu][s] : 0.0;
                for (int l = 0; l < m; ++l) {
                    if (l == nu) v -= Gam[l][s][mu] * D[l];
                    if (l == mu) v -= Gam[l][s][nu] * D[l];
                }
                T1[s][mu][nu] = v;
            }
    {
        double nsq = 0.0;
        for (int s = 0; s < m; ++s)
            for (int mu = 0; mu < m; ++mu)
                for (int nu = 0; nu < m; ++nu)
                    nsq += inv[s] * inv[mu] * inv[nu] * T1[s][mu][nu] * T1[s][mu][nu];
        total += r * std::sqrt(nsq);
    }
    if (k < 2) return total;

    // dT1[t][s][mu][nu] = coordinate partial of T1
    double nsq2 = 0.0;
    for (int t = 0; t < m; ++t)
        for (int s = 0; s < m; ++s)
            for (int mu = 0; mu < m; ++mu)
                for (int nu = 0; nu < m; ++nu) {
                    double dT1 = (mu == nu) ? ddD[mu][s][t] : 0.0;
                    for (int l = 0; l < m; ++l) {
                        if (l == nu) dT1 -= dGam[t][l][s][mu] * D[l] + Gam[l][s][mu] * dD[l][t];
                        if (l == mu) dT1 -= dGam[t][l][s][nu] * D[l] + Gam[l][s][nu] * dD[l][t];
                    }
                    double v = dT1;
                    for (int l = 0; l < m; ++l) {
                        v -= Gam[l][t][s] * T1[l][mu][nu];
                        v -= Gam[l][t][mu] * T1[s][l][nu];
                        v -= Gam[l][t][nu] * T1[s][mu][l];
                    }
                    nsq2 += inv[t] * inv[s] * inv[mu] * inv[nu] * v * v;
                }
    total += r * r * std::sqrt(nsq2);
    return total;
}

}  // namespace

double decay_norm(const AsymptoticConeMetric& metric, int k, double r) {
    if (k < 0 || k > 2) throw std::invalid_argument("decay_norm: order k must be 0, 1, or 2");
    metric.require_inside(r, 4.0e-3 * r);
    const LinkMetric& link = metric.link();

    double sup = 0.0;
    if (link.has_basis()) {
        const int nn = link.basis()->grid().nodes();
        for (int n = 0; n < nn; ++n) {
            DecayPointData pt{link.chart_at_node(n, 2), metric.alpha_jet(r, n, 2), metric.beta_jet(r, n, 2)};
            sup = std::max(sup, decay_value_at(metric, k, r, pt));
        }
        return sup;
    }
    // Round links of other dimensions carry constant perturbation fields, and
    // the cone is homogeneous: one generic chart point represents the sup.
    std::vector<double> coords(link.dim(), 1.0);
    DecayPointData pt{link.chart_at(coords, 2), metric.alpha_jet(r, 0, 2), metric.beta_jet(r, 0, 2)};
    return decay_value_at(metric, k, r, pt);
}

}  // namespace coniso
