#pragma once

#include "vfc/smdp.hpp"
#include "vfc/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace vfc {

/// SplitMix64 step; the basis of all sub-stream seeding.
uint64_t splitmix64(uint64_t& state);

/// Seed of replication j: splitmix64 chain over (seed, j). Documented so
/// results are reproducible from the (seed, replication index) pair alone.
uint64_t substream_seed(uint64_t seed, uint64_t replication);

/// Uniform double in [0, 1) from a 64-bit engine, 53 mantissa bits.
double uniform01(std::mt19937_64& rng);

/// Exponential draw by inversion; uniform argument kept away from 0.
double exponential(std::mt19937_64& rng, double rate);

struct SimConfig {
    uint64_t seed = 1;
    int replications = 1;
    double horizon_discount_floor = 1e-6;  // stop when e^{-alpha t} drops below
    SystemState initial_state;
};

struct ReplicationRecord {
    double discounted_reward = 0.0;
    long epochs = 0;
    int drops = 0;          // drop decisions taken (terminal)
    int interruptions = 0;  // interrupted-task penalties incurred (terminal)
};

struct SimResult {
    double mean_discounted_reward = 0.0;
    double std_error = 0.0;
    int replications = 0;
    // visits by event kind of the states entered: A, D_1..D_N, F+1, F-1
    std::vector<long> event_counts;
    double drop_rate = 0.0;          // fraction of replications ending in a drop
    double interruption_rate = 0.0;  // fraction ending in an interruption
    std::vector<ReplicationRecord> records;
};

/**
Monte-Carlo estimate of the discounted reward stream under a fixed policy:
exponential sojourns at sigma(s, a), lump income at each epoch, exact
exponential holding-cost integral over each sojourn, absorbing terminal.
Deterministic for a fixed seed; replications use independent sub-streams.
*/
SimResult simulate(const TransitionTable& table, const Policy& policy,
                   const SimConfig& sim);

/// Draws a successor index from the row distribution; exposed for the
/// frequency sanity tests.
int sample_successor(const ActionRow& row, std::mt19937_64& rng);

/// One row per replication: seed index, reward, epochs, drops, interruptions.
void write_sim_dump(const SimResult& result, std::ostream& out);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/**
Simulates the retransmission chain behind the expected-slot-count formula:
per-attempt failure probability p, uniform slot draw from {1..W_l}, window
doubling capped at stage m, and one extra capped-window draw for chains
longer than m (the convention the closed form integrates over).
*/
McEstimate mc_backoff_slots(double p, int w_min, int m_stage, long trials,
                            uint64_t seed);

/// Samples slot statuses from M independent transmitters at probability tau
/// and averages the idle/success/collision durations.
McEstimate mc_slot_status(double tau, int m_vehicles, const DcfParams& params,
                          int i_rus, long trials, uint64_t seed);

}  // namespace vfc
