#pragma once

#include "coniso/cone_metrics.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace coniso {

// Run configuration ingested from a JSON document. Example:
//
//   {
//     "link": {"kind": "scaled_sphere", "dim": 2, "radius": 0.8},
//     "metric": {
//       "r_min": 1.0, "r_max": 120.0, "decay_rate": 1.0,
//       "alpha": {"profile": "power", "tau": 1.0, "amplitude": 0.1,
//                 "field": [[2, 0, 1.5853309190424043]]},
//       "beta":  {"profile": "power", "tau": 1.0, "amplitude": 0.08}
//     },
//     "resolution": {"degree": 16, "fd_step_rel": 1e-3},
//     "tolerances": {"newton": 1e-10, "vp": 1e-8},
//     "volumes": [100, 200], "betas": [0.25, 0.5], "radii": [2, 5, 10],
//     "count": 8
//   }
//
// Conformal links use {"kind": "conformal_s2", "degree": 16,
// "coefficients": [[l, k, value], ...]}. A missing "metric" block means the
// exact cone on (1, 100). Unknown keys are rejected.
struct RunConfig {
    std::shared_ptr<const AsymptoticConeMetric> metric;
    int degree = 16;
    double fd_step_rel = 1e-3;
    double newton_tolerance = 1e-10;
    double vp_tolerance = 1e-8;
    std::vector<double> volumes;
    std::vector<double> betas;
    std::vector<double> radii;
    int count = 8;
    nlohmann::json raw;

    const LinkMetric& link() const { return metric->link(); }

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path);

    // Defaults used when the config omits the corresponding lists.
    std::vector<double> effective_radii() const;
    std::vector<double> effective_betas() const;
};

}  // namespace coniso
