#pragma once

#include "fermi/dyson.hpp"
#include "fermi/limit.hpp"
#include "fermi/oracle.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace fermi {

/// Malformed or inconsistent experiment document.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunBlock {
    std::vector<double> lambdas{0.5};
    double t = 0.5;
    int order = 2;
    int N_max = 3;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
    int cap = -1;
    long samples = 200000;
    SimplexScheme scheme = SimplexScheme::Auto;
    Evaluator evaluator = Evaluator::Continuum;
};

struct ExperimentConfig {
    SystemModel sys;
    ReservoirModel bath{Lorentzian{}, 0.0};
    std::vector<SmearedVector> left, right;
    CVec phi1, phi2;
    RunBlock run;
    /// Named one-particle vectors for word expressions (all of equal length).
    std::map<std::string, CVec> vectors;
    std::uint64_t hash = 0;  // FNV-1a of the canonical document

    DysonTermSpec dyson_spec(int n, double lambda) const;
    PropagatorRun propagator_run(double lambda) const;
};

/// Parses and validates; every guard failure names the offending field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

std::string hash_hex(std::uint64_t h);

}  // namespace fermi
