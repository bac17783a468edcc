#pragma once

#include "vfc/sim.hpp"
#include "vfc/smdp.hpp"
#include "vfc/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vfc {

enum class ExperimentKind {
    ArrivalRate,    // (K, i, lambda_t)
    Delay,          // (K, i, delay_ms)
    PolicyMix,      // (K, action, probability)
    RewardCompare,  // (K, V_optimal, V_greedy, improvement_pct)
    Feasibility,    // (mu_t, max_K_meeting_100ms)
    Simulate,       // per-replication table
};

/// Parses the CLI/config spelling; throws std::invalid_argument.
ExperimentKind experiment_kind_from(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::ArrivalRate;
    std::vector<int> k_range = {5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> mu_t_list = {25.0, 50.0};
    std::string out_dir = ".";
    uint64_t seed = 1;
    int replications = 10000;
    double horizon_discount_floor = 1e-6;
    double delay_limit_ms = 100.0;
    int feasibility_scan_max = 64;

    void validate(const SystemConfig& base) const;
};

struct FeasibilityResult {
    int max_k = 0;
    bool capped = false;  // scan ceiling reached without a violation
};

/// Largest K whose worst-case task delay max_i D_t(i; K) + D_p(i) stays
/// within the limit; 0 when even K = N violates it.
FeasibilityResult feasibility_bound(const SystemConfig& base, double mu_t,
                                    double delay_limit_ms, int scan_max);

/**
Quasi-stationary occupation weights of the live states under a fixed
policy: the normalized dominant left eigenvector of the live block of the
uniformized chain (power iteration, L1 change below tol). The eigenvector
is invariant to the uniformization rate, so a tight local rate is used for
faster convergence.
*/
std::vector<double> quasi_stationary_distribution(const TransitionTable& table,
                                                  const Policy& policy,
                                                  double tol = 1e-10,
                                                  long max_iterations = 20'000'000);

/// Weight of each action (index 0..N: drop, allocate 1..N) among
/// task-arrival states, under the given per-state weights.
std::vector<double> action_mix(const TransitionTable& table, const Policy& policy,
                               const std::vector<double>& state_weights);

/// Runs one experiment, writes its CSV file(s) atomically into
/// spec.out_dir, and returns the written paths.
std::vector<std::string> run(const ExperimentSpec& spec, const SystemConfig& base);

}  // namespace vfc
