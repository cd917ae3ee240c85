#pragma once

#include "fermi/config.hpp"
#include "fermi/dyson.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>

namespace fermi::lab {

CVec random_vector(std::mt19937_64& rng, int m, double scale = 1.0);
CMat random_matrix(std::mt19937_64& rng, int r, int c);
CMat random_hermitian(std::mt19937_64& rng, int d);

struct CarReport {
    double anti_err = 0.0;      // max |{A-(f), A+(g)} - <f|g> I|
    double create_err = 0.0;    // max |{A+(f), A+(g)}|
    int trials = 0;
};
CarReport car_check(int modes, int trials, std::uint64_t seed);

struct WickReport {
    double word_err = 0.0;
    double block_err = 0.0;
    int instances = 0;
};
/// Random words of length <= max_len and random two-block products on M modes.
WickReport wick_random_check(int max_len, int modes, int instances, std::uint64_t seed);

/// The worked sign example: partition, xi, G_out and G_in, one per line.
std::string sign_demo_text();
/// Symbolic xi of a partition, e.g. "β₂α₁+β₄α₃".
std::string xi_expression(const Partition& g);

/// One lambda of a convergence sweep.
struct ConvergencePoint {
    double lambda = 0.0;
    cplx finite, limit;
    double gap = 0.0;
    double drift = 0.0, leakage = 0.0;
    double ode_err = 0.0;    // drift + leakage + change under a 100x tighter tolerance
    double disc_err = 0.0;   // change under a doubled grid and under a doubled band
    double tail = 0.0;       // tail bound + roundoff of the limit series
    long steps = 0;
    double budget() const { return ode_err + disc_err + tail; }
};

struct ConvergenceSweep {
    std::vector<ConvergencePoint> points;
    bool monotone = false;
};

/// Runs the lambda list of the config in parallel; the limit side has no legs on the left.
ConvergenceSweep convergence_sweep(const ExperimentConfig& cfg, bool with_budget, int threads);

/// Summability of the truncation bounds: b(n+1)/b(n) sampled at n = 50, 100,
/// ..., 1600 must not increase and must end below 1. An underflowed bound
/// counts as summable. `last` receives the final sampled ratio.
bool bound_ratio_test(const DysonTermSpec& spec, double* last = nullptr);

/// FERMI_LAB_THREADS, then hardware concurrency, when requested <= 0.
int resolve_threads(int requested);

}  // namespace fermi::lab
