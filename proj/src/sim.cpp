#include "vfc/sim.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace vfc {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t substream_seed(uint64_t seed, uint64_t replication) {
    uint64_t state = seed;
    (void)splitmix64(state);
    state ^= 0xD1B54A32D192ED03ull * (replication + 1);
    return splitmix64(state);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
    const double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    return -std::log(u) / rate;
}

int sample_successor(const ActionRow& row, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    for (const Transition& t : row.successors) {
        cumulative += t.probability;
        if (u < cumulative) return t.successor;
    }
    return row.successors.back().successor;
}

SimResult simulate(const TransitionTable& table, const Policy& policy,
                   const SimConfig& sim) {
    if (sim.replications < 1)
        throw std::invalid_argument("simulate: replications must be >= 1");
    if (sim.horizon_discount_floor <= 0.0 || sim.horizon_discount_floor >= 1.0)
        throw std::invalid_argument("simulate: discount floor must be in (0, 1)");
    const int start = table.index_of(sim.initial_state);
    if (start < 0)
        throw std::invalid_argument("simulate: initial state " +
                                    to_string(sim.initial_state) + " not in the model");

    const double alpha = table.config.alpha;
    const int terminal = table.terminal_index();

    SimResult result;
    result.replications = sim.replications;
    result.event_counts.assign(table.config.n_max + 3, 0);
    result.records.resize(sim.replications);

    auto event_slot = [&](const SystemState& s) {
        return s.event.order_index(table.config.n_max);
    };

    for (int rep = 0; rep < sim.replications; ++rep) {
        std::mt19937_64 rng(substream_seed(sim.seed, static_cast<uint64_t>(rep)));
        ReplicationRecord& rec = result.records[rep];
        int state = start;
        double discount = 1.0;
        result.event_counts[event_slot(table.states[state])] += 1;
        while (state != terminal && discount >= sim.horizon_discount_floor) {
            const SystemState& here = table.states[state];
            const ActionRow& row = table.row(state, policy.actions[state]);
            if (policy.actions[state].is_drop()) rec.drops += 1;
            if (here.event.kind() == Event::Kind::VehicleDeparture &&
                here.busy_rus() == here.m_vehicles)
                rec.interruptions += 1;
            rec.discounted_reward += row.income * discount;
            const double sojourn = exponential(rng, row.sigma);
            const double decay = std::exp(-alpha * sojourn);
            rec.discounted_reward -= row.cost_rate * discount * (1.0 - decay) / alpha;
            discount *= decay;
            state = sample_successor(row, rng);
            rec.epochs += 1;
            if (state != terminal) result.event_counts[event_slot(table.states[state])] += 1;
        }
    }

    double sum = 0.0;
    int drops = 0, interruptions = 0;
    for (const ReplicationRecord& rec : result.records) {
        sum += rec.discounted_reward;
        drops += rec.drops;
        interruptions += rec.interruptions;
    }
    const int n = sim.replications;
    result.mean_discounted_reward = sum / n;
    double ss = 0.0;
    for (const ReplicationRecord& rec : result.records) {
        const double d = rec.discounted_reward - result.mean_discounted_reward;
        ss += d * d;
    }
    result.std_error = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    result.drop_rate = static_cast<double>(drops) / n;
    result.interruption_rate = static_cast<double>(interruptions) / n;
    return result;
}

void write_sim_dump(const SimResult& result, std::ostream& out) {
    char buf[64];
    out << "seed_index,discounted_reward,epochs,drops,interruptions\n";
    for (size_t i = 0; i < result.records.size(); ++i) {
        const ReplicationRecord& r = result.records[i];
        std::snprintf(buf, sizeof(buf), "%.12g", r.discounted_reward);
        out << i << ',' << buf << ',' << r.epochs << ',' << r.drops << ','
            << r.interruptions << '\n';
    }
}

McEstimate mc_backoff_slots(double p, int w_min, int m_stage, long trials,
                            uint64_t seed) {
    if (p < 0.0 || p >= 1.0)
        throw std::domain_error("mc_backoff_slots: p must be in [0, 1)");
    if (trials < 1) throw std::invalid_argument("mc_backoff_slots: trials must be >= 1");

    std::mt19937_64 rng(substream_seed(seed, 0));
    auto window = [&](int stage) {
        return (stage <= m_stage ? (1 << stage) : (1 << m_stage)) * w_min;
    };
    auto uniform_slots = [&](int w) {
        return 1 + static_cast<int>(uniform01(rng) * w);  // uniform over {1..w}
    };

    double sum = 0.0, sum_sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        long failures = 0;
        while (uniform01(rng) < p) ++failures;
        double slots = 0.0;
        if (failures <= m_stage) {
            for (int l = 0; l <= failures; ++l) slots += uniform_slots(window(l));
        } else {
            for (int l = 0; l <= m_stage; ++l) slots += uniform_slots(window(l));
            for (long extra = 0; extra < failures - m_stage + 1; ++extra)
                slots += uniform_slots(window(m_stage));
        }
        sum += slots;
        sum_sq += slots * slots;
    }
    McEstimate est;
    est.mean = sum / trials;
    const double var = (sum_sq - sum * sum / trials) / (trials - 1.0);
    est.std_error = std::sqrt(var / trials);
    return est;
}

McEstimate mc_slot_status(double tau, int m_vehicles, const DcfParams& params,
                          int i_rus, long trials, uint64_t seed) {
    if (tau <= 0.0 || tau >= 1.0)
        throw std::domain_error("mc_slot_status: tau must be in (0, 1)");
    if (trials < 1) throw std::invalid_argument("mc_slot_status: trials must be >= 1");

    DcfMetrics metrics;
    metrics.params = params;
    const double t_success = metrics.success_time_us(i_rus);
    const double t_collision = metrics.collision_time_us(i_rus);

    std::mt19937_64 rng(substream_seed(seed, 0));
    double sum = 0.0, sum_sq = 0.0;
    for (long t = 0; t < trials; ++t) {
        int transmitters = 0;
        for (int v = 0; v < m_vehicles; ++v)
            if (uniform01(rng) < tau) ++transmitters;
        const double duration = transmitters == 0   ? params.slot_us
                                : transmitters == 1 ? t_success
                                                    : t_collision;
        sum += duration;
        sum_sq += duration * duration;
    }
    McEstimate est;
    est.mean = sum / trials;
    const double var = (sum_sq - sum * sum / trials) / (trials - 1.0);
    est.std_error = std::sqrt(var / trials);
    return est;
}

}  // namespace vfc
