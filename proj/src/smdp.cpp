#include "vfc/smdp.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace vfc {

void SystemConfig::validate() const {
    if (k_max < 1) throw std::invalid_argument("SystemConfig: k_max must be >= 1");
    if (n_max < 1 || n_max > k_max)
        throw std::invalid_argument("SystemConfig: need 1 <= n_max <= k_max");
    if (lambda_f <= 0 || mu_f <= 0 || mu_t <= 0)
        throw std::invalid_argument("SystemConfig: rates must be > 0");
    if (beta <= 0 || xi <= 0 || eta <= 0)
        throw std::invalid_argument("SystemConfig: prices and penalties must be > 0");
    if (t_local <= 0) throw std::invalid_argument("SystemConfig: t_local must be > 0");
    if (alpha <= 0) throw std::invalid_argument("SystemConfig: alpha must be > 0");
    if (epsilon_user <= 0)
        throw std::invalid_argument("SystemConfig: epsilon_user must be > 0");
    dcf.validate();
}

int Event::order_index(int n_max) const {
    switch (kind_) {
        case Kind::TaskArrival: return 0;
        case Kind::TaskDeparture: return rus_;
        case Kind::VehicleArrival: return n_max + 1;
        case Kind::VehicleDeparture: return n_max + 2;
    }
    return -1;
}

int SystemState::busy_rus() const {
    int total = 0;
    for (size_t i = 0; i < occupancy.size(); ++i)
        total += static_cast<int>(i + 1) * occupancy[i];
    return total;
}

int SystemState::tasks_in_service() const {
    int total = 0;
    for (int n : occupancy) total += n;
    return total;
}

std::string to_string(const SystemState& s) {
    std::string out = "(" + std::to_string(s.m_vehicles);
    for (int n : s.occupancy) out += "," + std::to_string(n);
    switch (s.event.kind()) {
        case Event::Kind::TaskArrival: out += ",A"; break;
        case Event::Kind::TaskDeparture:
            out += ",D" + std::to_string(s.event.departure_rus());
            break;
        case Event::Kind::VehicleArrival: out += ",F+1"; break;
        case Event::Kind::VehicleDeparture: out += ",F-1"; break;
    }
    return out + ")";
}

std::string to_string(Action a) { return std::to_string(a.value); }

RateTable build_rate_table(const SystemConfig& config) {
    config.validate();
    RateTable t;
    t.k_max = config.k_max;
    t.n_max = config.n_max;
    t.task_rate.resize(static_cast<size_t>(config.k_max) * config.n_max);
    t.task_delay_s.resize(t.task_rate.size());
    for (int m = 1; m <= config.k_max; ++m) {
        const DcfMetrics metrics = analyze_dcf(config.dcf, m);
        for (int i = 1; i <= config.n_max; ++i) {
            const size_t idx = static_cast<size_t>(m - 1) * config.n_max + (i - 1);
            t.task_delay_s[idx] = metrics.task_delay_us(i) / 1e6;
            t.task_rate[idx] = metrics.task_arrival_rate(i);
            t.max_task_rate = std::max(t.max_task_rate, t.task_rate[idx]);
        }
    }
    return t;
}

std::vector<std::string> income_warnings(const SystemConfig& config,
                                         const RateTable& rates) {
    std::vector<std::string> warnings;
    double worst = 0.0;
    int worst_m = 0, worst_i = 0;
    for (int m = 1; m <= config.k_max; ++m) {
        for (int i = 1; i <= config.n_max; ++i) {
            const double delay =
                rates.task_delay_seconds(m, i) + 1.0 / (i * config.mu_t);
            if (delay > worst) {
                worst = delay;
                worst_m = m;
                worst_i = i;
            }
        }
    }
    if (worst > config.t_local) {
        char buf[256];
        std::snprintf(buf, sizeof(buf),
                      "offload delay %.6g s at (M=%d, i=%d) exceeds t_local %.6g s; "
                      "some allocation incomes are negative",
                      worst, worst_m, worst_i, config.t_local);
        warnings.emplace_back(buf);
    }
    return warnings;
}

namespace {

void enumerate_occupancies(int n_max, int budget, std::vector<int>& current,
                           std::vector<std::vector<int>>& out) {
    const int depth = static_cast<int>(current.size());
    if (depth == n_max) {
        out.push_back(current);
        return;
    }
    const int unit = depth + 1;
    for (int n = 0; n * unit <= budget; ++n) {
        current.push_back(n);
        enumerate_occupancies(n_max, budget - n * unit, current, out);
        current.pop_back();
    }
}

std::vector<Event> attachable_events(int m_vehicles, const std::vector<int>& occupancy,
                                     const SystemConfig& config) {
    std::vector<Event> events;
    events.push_back(Event::arrival());
    for (int i = 1; i <= config.n_max; ++i)
        if (occupancy[i - 1] >= 1) events.push_back(Event::departure(i));
    if (m_vehicles < config.k_max) events.push_back(Event::vehicle_arrival());
    if (m_vehicles > 1) events.push_back(Event::vehicle_departure());
    return events;
}

// Shared shape of one (state, action) row: the configuration every
// successor inherits and the rate of the next task arrival.
struct PostConfig {
    int m_prime;
    std::vector<int> occupancy;
    double arrival_rate;
    bool to_terminal;
};

void check_feasible(const SystemState& s, Action a, int n_max) {
    const bool arrival = s.event.kind() == Event::Kind::TaskArrival;
    const bool ok = arrival ? a.is_drop() || (a.is_allocate() && a.value <= n_max &&
                                              a.value <= s.available_rus())
                            : a.is_none();
    if (!ok)
        throw std::invalid_argument("action " + to_string(a) + " infeasible at " +
                                    to_string(s));
}

PostConfig post_config(const SystemState& s, Action a, const RateTable& rates,
                       ZeroOccupancyFallback fallback) {
    check_feasible(s, a, rates.n_max);
    PostConfig pc{s.m_vehicles, s.occupancy, 0.0, false};
    switch (s.event.kind()) {
        case Event::Kind::TaskArrival:
            if (a.is_allocate()) {
                pc.occupancy[a.value - 1] += 1;
                pc.arrival_rate = s.m_vehicles * rates.lambda_t(s.m_vehicles, a.value);
            } else {  // drop ends the process
                pc.to_terminal = true;
                pc.arrival_rate =
                    s.m_vehicles * expected_task_rate(s, rates, fallback);
            }
            break;
        case Event::Kind::TaskDeparture:
            pc.occupancy[s.event.departure_rus() - 1] -= 1;
            pc.arrival_rate = s.m_vehicles * expected_task_rate(s, rates, fallback);
            break;
        case Event::Kind::VehicleArrival:
            pc.m_prime = s.m_vehicles + 1;
            pc.arrival_rate = pc.m_prime * expected_task_rate(s, rates, fallback);
            break;
        case Event::Kind::VehicleDeparture:
            pc.m_prime = s.m_vehicles - 1;
            pc.arrival_rate = pc.m_prime * expected_task_rate(s, rates, fallback);
            if (s.busy_rus() == s.m_vehicles) pc.to_terminal = true;
            break;
    }
    return pc;
}

double sigma_of(const PostConfig& pc, const SystemConfig& config) {
    // Accumulation order mirrors successor emission: arrival, departures
    // by class, vehicle arrival, vehicle departure.
    double sigma = pc.arrival_rate;
    for (int j = 1; j <= config.n_max; ++j)
        sigma += pc.occupancy[j - 1] * j * config.mu_t;
    if (pc.m_prime < config.k_max) sigma += config.lambda_f;
    if (pc.m_prime > 1) sigma += config.mu_f;
    return sigma;
}

}  // namespace

std::vector<SystemState> enumerate_states(const SystemConfig& config) {
    config.validate();
    std::vector<SystemState> states;
    for (int m = 1; m <= config.k_max; ++m) {
        std::vector<std::vector<int>> occupancies;
        std::vector<int> scratch;
        enumerate_occupancies(config.n_max, m, scratch, occupancies);
        for (const auto& occ : occupancies)
            for (const Event& e : attachable_events(m, occ, config))
                states.push_back(SystemState{m, occ, e});
    }
    return states;
}

std::vector<Action> feasible_actions(const SystemState& s, const SystemConfig& config) {
    if (s.event.kind() != Event::Kind::TaskArrival) return {Action::none()};
    std::vector<Action> actions{Action::drop()};
    const int limit = std::min(config.n_max, s.available_rus());
    for (int i = 1; i <= limit; ++i) actions.push_back(Action::allocate(i));
    return actions;
}

double expected_task_rate(const SystemState& s, const RateTable& rates,
                          ZeroOccupancyFallback fallback) {
    const int total = s.tasks_in_service();
    if (total == 0) {
        if (fallback == ZeroOccupancyFallback::FirstClass)
            return rates.lambda_t(s.m_vehicles, 1);
        double sum = 0.0;
        for (int i = 1; i <= rates.n_max; ++i) sum += rates.lambda_t(s.m_vehicles, i);
        return sum / rates.n_max;
    }
    double rate = 0.0;
    for (int i = 1; i <= rates.n_max; ++i)
        rate += static_cast<double>(s.occupancy[i - 1]) / total *
                rates.lambda_t(s.m_vehicles, i);
    return rate;
}

double expected_event_rate(const SystemState& s, Action a, const RateTable& rates,
                           const SystemConfig& config, ZeroOccupancyFallback fallback) {
    return sigma_of(post_config(s, a, rates, fallback), config);
}

double income(const SystemState& s, Action a, const RateTable& rates,
              const SystemConfig& config) {
    check_feasible(s, a, rates.n_max);
    switch (s.event.kind()) {
        case Event::Kind::TaskArrival:
            if (a.is_drop()) return -config.xi;
            return config.beta *
                   (config.t_local - rates.task_delay_seconds(s.m_vehicles, a.value) -
                    1.0 / (a.value * config.mu_t));
        case Event::Kind::VehicleDeparture:
            return s.busy_rus() == s.m_vehicles ? -config.eta : 0.0;
        default:
            return 0.0;
    }
}

double cost(const SystemState& s, Action a, const RateTable& rates,
            const SystemConfig& config, const ModelOptions& options) {
    const PostConfig pc = post_config(s, a, rates, options.fallback);
    const std::vector<int>& basis =
        options.cost_basis == CostBasis::PostDecision ? pc.occupancy : s.occupancy;
    double b = 0.0;
    for (size_t i = 0; i < basis.size(); ++i) b += static_cast<int>(i + 1) * basis[i];
    return b / (config.alpha + sigma_of(pc, config));
}

int TransitionTable::index_of(const SystemState& s) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == s) return static_cast<int>(i);
    return -1;
}

const ActionRow& TransitionTable::row(int state_index, Action a) const {
    for (const ActionRow& r : rows[state_index])
        if (r.action == a) return r;
    throw std::out_of_range("TransitionTable::row: action " + to_string(a) +
                            " infeasible at " + to_string(states[state_index]));
}

TransitionTable build_model(const SystemConfig& config, const ModelOptions& options) {
    TransitionTable table;
    table.config = config;
    table.options = options;
    table.rates = build_rate_table(config);
    table.states = enumerate_states(config);

    // canonical index for successor lookup
    struct Key {
        int m;
        std::vector<int> occ;
        int ev;
        auto operator<=>(const Key&) const = default;
    };
    std::vector<std::pair<Key, int>> index;
    index.reserve(table.states.size());
    for (size_t i = 0; i < table.states.size(); ++i) {
        const SystemState& s = table.states[i];
        index.emplace_back(
            Key{s.m_vehicles, s.occupancy, s.event.order_index(config.n_max)},
            static_cast<int>(i));
    }
    std::sort(index.begin(), index.end());
    auto lookup = [&](int m, const std::vector<int>& occ, const Event& e) {
        const Key key{m, occ, e.order_index(config.n_max)};
        auto it = std::lower_bound(index.begin(), index.end(), key,
                                   [](const auto& lhs, const Key& k) { return lhs.first < k; });
        if (it == index.end() || it->first != key)
            throw std::logic_error("build_model: successor state not enumerated");
        return it->second;
    };

    table.rows.resize(table.states.size());
    for (size_t si = 0; si < table.states.size(); ++si) {
        const SystemState& s = table.states[si];
        for (Action a : feasible_actions(s, config)) {
            const PostConfig pc = post_config(s, a, table.rates, options.fallback);
            ActionRow row;
            row.action = a;
            row.sigma = sigma_of(pc, config);
            row.income = income(s, a, table.rates, config);
            const std::vector<int>& basis = options.cost_basis == CostBasis::PostDecision
                                                ? pc.occupancy
                                                : s.occupancy;
            for (size_t i = 0; i < basis.size(); ++i)
                row.cost_rate += static_cast<int>(i + 1) * basis[i];
            row.reward = row.income - row.cost_rate / (config.alpha + row.sigma);

            if (pc.to_terminal) {
                row.terminal = true;
                row.successors.push_back({table.terminal_index(), 1.0});
            } else {
                row.successors.push_back(
                    {lookup(pc.m_prime, pc.occupancy, Event::arrival()),
                     pc.arrival_rate / row.sigma});
                for (int j = 1; j <= config.n_max; ++j) {
                    if (pc.occupancy[j - 1] < 1) continue;
                    row.successors.push_back(
                        {lookup(pc.m_prime, pc.occupancy, Event::departure(j)),
                         pc.occupancy[j - 1] * j * config.mu_t / row.sigma});
                }
                if (pc.m_prime < config.k_max)
                    row.successors.push_back(
                        {lookup(pc.m_prime, pc.occupancy, Event::vehicle_arrival()),
                         config.lambda_f / row.sigma});
                if (pc.m_prime > 1)
                    row.successors.push_back(
                        {lookup(pc.m_prime, pc.occupancy, Event::vehicle_departure()),
                         config.mu_f / row.sigma});
            }

            double total = 0.0;
            for (const Transition& t : row.successors) {
                if (t.probability < 0.0)
                    throw std::logic_error("build_model: negative probability at " +
                                           to_string(s) + " a=" + to_string(a));
                total += t.probability;
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw std::logic_error("build_model: successor probabilities sum to " +
                                       std::to_string(total) + " at " + to_string(s) +
                                       " a=" + to_string(a));
            table.rows[si].push_back(std::move(row));
        }
    }
    return table;
}

void write_table_dump(const TransitionTable& table, std::ostream& out) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    for (size_t si = 0; si < table.states.size(); ++si) {
        const std::string state = to_string(table.states[si]);
        for (const ActionRow& row : table.rows[si]) {
            for (const Transition& t : row.successors) {
                const std::string succ = t.successor == table.terminal_index()
                                             ? "TERMINAL"
                                             : to_string(table.states[t.successor]);
                out << state << ' ' << to_string(row.action) << ' ' << fmt(row.sigma)
                    << ' ' << fmt(row.reward) << ' ' << succ << ' '
                    << fmt(t.probability) << '\n';
            }
        }
    }
}

}  // namespace vfc
