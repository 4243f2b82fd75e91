#pragma once

#include <cstdint>

namespace mfgn {

/// Parameters of the primal-dual splitting loop. Step sizes left at zero are
/// replaced by the safe default 0.95 / ||A||; the pair must satisfy
/// tau * sigma * ||A||^2 < 1.
struct SolverConfig {
    double tau = 0.0;
    double sigma = 0.0;
    /// With tau and sigma unset, tau/sigma = step_ratio and
    /// tau*sigma = (0.95/||A||)^2. Larger ratios favor the strongly convex
    /// primal side.
    double step_ratio = 4.0;
    double theta = 1.0; // over-relaxation in [0, 1]
    long max_iters = 200000;
    double gap_tol_rel = 1e-5;
    double residual_tol = 1e-8;
    long cert_interval = 50;       // iterations between certificate evaluations
    long checkpoint_interval = 0;  // 0 disables periodic checkpoints
    enum class Init { stationary, random };
    Init init = Init::stationary;
    std::uint64_t seed = 0;
    double delta_mask = 1e-3; // support threshold for optimality certificates
};

} // namespace mfgn
