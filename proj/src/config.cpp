#include "coniso/config.hpp"

#include "coniso/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace coniso {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail("unknown key \"" + key + "\" in " + where);
}

double need_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number()) fail("missing numeric \"" + key + "\" in " + where);
    return obj[key].get<double>();
}

SpectralField parse_field(const json& spec, int degree, const std::string& where) {
    auto basis = make_basis(degree);
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(basis->size());
    if (!spec.is_array()) fail(where + " must be an array of [l, k, value] triples");
    for (const auto& entry : spec) {
        if (!entry.is_array() || entry.size() != 3) fail(where + " entries must be [l, k, value]");
        const int l = entry[0].get<int>();
        const int k = entry[1].get<int>();
        if (l < 0 || l > degree || std::abs(k) > l) fail(where + ": harmonic index out of range");
        coeff[SphereBasis::index(l, k)] = entry[2].get<double>();
    }
    return SpectralField::from_coefficients(std::move(basis), std::move(coeff));
}

LinkMetric parse_link(const json& spec, int degree) {
    if (!spec.is_object()) fail("\"link\" must be an object");
    const std::string kind = spec.value("kind", "");
    if (kind == "scaled_sphere") {
        check_keys(spec, {"kind", "dim", "radius"}, "link");
        const int dim = spec.value("dim", 2);
        const double radius = need_number(spec, "radius", "link");
        return LinkMetric::scaled_sphere(dim, radius, degree);
    }
    if (kind == "conformal_s2") {
        check_keys(spec, {"kind", "degree", "coefficients"}, "link");
        const int n = spec.value("degree", degree);
        if (!spec.contains("coefficients")) fail("conformal_s2 link needs \"coefficients\"");
        return LinkMetric::conformal_s2(parse_field(spec["coefficients"], n, "link.coefficients"));
    }
    fail("link.kind must be \"scaled_sphere\" or \"conformal_s2\"");
}

PerturbationTerm parse_term(const json& spec, int degree, const std::string& where) {
    check_keys(spec, {"profile", "tau", "amplitude", "field", "lo", "hi"}, where);
    PerturbationTerm term;
    const std::string profile = spec.value("profile", "power");
    if (profile == "power") {
        term.profile.kind = ProfileKind::Power;
    } else if (profile == "power_log") {
        term.profile.kind = ProfileKind::PowerLog;
    } else if (profile == "bump") {
        term.profile.kind = ProfileKind::Bump;
        term.profile.bump_lo = need_number(spec, "lo", where);
        term.profile.bump_hi = need_number(spec, "hi", where);
        if (!(term.profile.bump_lo < term.profile.bump_hi)) fail(where + ": bump needs lo < hi");
    } else {
        fail(where + ".profile must be \"power\", \"power_log\", or \"bump\"");
    }
    term.profile.tau = spec.value("tau", 1.0);
    term.profile.amplitude = need_number(spec, "amplitude", where);
    if (spec.contains("field")) term.field = parse_field(spec["field"], degree, where + ".field");
    return term;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) fail("top level must be an object");
    check_keys(doc,
               {"link", "metric", "resolution", "tolerances", "volumes", "betas", "radii", "count"},
               "top level");
    RunConfig cfg;
    cfg.raw = doc;

    if (doc.contains("resolution")) {
        const json& res = doc["resolution"];
        check_keys(res, {"degree", "fd_step_rel"}, "resolution");
        cfg.degree = res.value("degree", 16);
        cfg.fd_step_rel = res.value("fd_step_rel", 1e-3);
        if (cfg.degree < 4 || cfg.degree > 48) fail("resolution.degree must lie in [4, 48]");
    }
    if (doc.contains("tolerances")) {
        const json& tol = doc["tolerances"];
        check_keys(tol, {"newton", "vp"}, "tolerances");
        cfg.newton_tolerance = tol.value("newton", 1e-10);
        cfg.vp_tolerance = tol.value("vp", 1e-8);
    }
    if (!doc.contains("link")) fail("missing \"link\"");

    try {
        LinkMetric link = parse_link(doc["link"], cfg.degree);
        double r_min = 1.0, r_max = 100.0, decay = 1.0;
        Perturbation pert;
        if (doc.contains("metric")) {
            const json& ms = doc["metric"];
            check_keys(ms, {"r_min", "r_max", "decay_rate", "alpha", "beta"}, "metric");
            r_min = ms.value("r_min", 1.0);
            r_max = ms.value("r_max", 100.0);
            decay = ms.value("decay_rate", 1.0);
            if (ms.contains("alpha")) pert.alpha = parse_term(ms["alpha"], cfg.degree, "metric.alpha");
            if (ms.contains("beta")) pert.beta = parse_term(ms["beta"], cfg.degree, "metric.beta");
        }
        cfg.metric =
            std::make_shared<AsymptoticConeMetric>(std::move(link), r_min, r_max, std::move(pert), decay);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());  // invalid numeric ranges surface as config errors
    }

    auto parse_list = [&](const char* key, std::vector<double>& out) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_array()) fail(std::string("\"") + key + "\" must be an array of numbers");
        for (const auto& v : doc[key]) out.push_back(v.get<double>());
    };
    parse_list("volumes", cfg.volumes);
    parse_list("betas", cfg.betas);
    parse_list("radii", cfg.radii);
    cfg.count = doc.value("count", 8);
    if (cfg.count < 2) fail("\"count\" must be at least 2");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("JSON parse failure in ") + path + ": " + e.what());
    }
    return from_json(doc);
}

std::vector<double> RunConfig::effective_radii() const {
    if (!radii.empty()) return radii;
    // five log-spaced radii strictly inside the annulus
    const double lo = 2.0 * metric->r_min();
    const double hi = 0.5 * metric->r_max();
    std::vector<double> out;
    for (int i = 0; i < 5; ++i) out.push_back(lo * std::pow(hi / lo, i / 4.0));
    return out;
}

std::vector<double> RunConfig::effective_betas() const {
    if (!betas.empty()) return betas;
    std::vector<double> out;
    for (int i = 1; i <= 19; ++i) out.push_back(i / 20.0);
    return out;
}

}  // namespace coniso
