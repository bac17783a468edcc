#pragma once

#include "vfc/dcf.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace vfc {

/**
System-level parameters of the offloading decision process. Rates are per
second, prices per second of saved time, penalties dimensionless, and the
discount factor alpha is a continuous-time rate.
*/
struct SystemConfig {
    int k_max = 12;           // maximum vehicles K
    int n_max = 3;            // maximum resource units per task N
    double lambda_f = 10.0;   // vehicle arrival rate
    double mu_f = 10.0;       // vehicle departure rate
    double mu_t = 25.0;       // service rate of one resource unit, tasks/s
    double beta = 5.0;        // price per saved second
    double t_local = 0.1;     // local processing time, seconds
    double xi = 10.0;         // drop penalty
    double eta = 18.0;        // interrupted-task penalty
    double alpha = 0.1;       // continuous-time discount rate
    double epsilon_user = 10.0;  // stopping-rule epsilon
    DcfParams dcf;

    void validate() const;  // throws std::invalid_argument
};

/// The event recorded in a state: what just happened and is being decided on.
class Event {
public:
    enum class Kind { TaskArrival, TaskDeparture, VehicleArrival, VehicleDeparture };

    static Event arrival() { return Event(Kind::TaskArrival, 0); }
    static Event departure(int i_rus) { return Event(Kind::TaskDeparture, i_rus); }
    static Event vehicle_arrival() { return Event(Kind::VehicleArrival, 0); }
    static Event vehicle_departure() { return Event(Kind::VehicleDeparture, 0); }

    Kind kind() const { return kind_; }
    /// For TaskDeparture, the number of units serving the departing task.
    int departure_rus() const { return rus_; }

    /// Canonical ordering index: A=0, D_i=i, F+1=n_max+1, F-1=n_max+2.
    int order_index(int n_max) const;

    bool operator==(const Event&) const = default;

private:
    Event(Kind k, int rus) : kind_(k), rus_(rus) {}
    Kind kind_;
    int rus_;
};

/// A live decision state (M, n_1..n_N, e). The absorbing terminal state is
/// represented by index only (TransitionTable::terminal_index).
struct SystemState {
    int m_vehicles = 1;
    std::vector<int> occupancy;  // n_1..n_N
    Event event = Event::arrival();

    int busy_rus() const;                      // sum_i i * n_i
    int available_rus() const { return m_vehicles - busy_rus(); }
    int tasks_in_service() const;              // sum_i n_i

    bool operator==(const SystemState&) const = default;
};

std::string to_string(const SystemState& s);

/// Decision: -1 take no action, 0 drop the arriving task, i >= 1 allocate i units.
struct Action {
    int value = -1;

    static Action none() { return {-1}; }
    static Action drop() { return {0}; }
    static Action allocate(int i_rus) { return {i_rus}; }

    bool is_none() const { return value == -1; }
    bool is_drop() const { return value == 0; }
    bool is_allocate() const { return value >= 1; }

    bool operator==(const Action&) const = default;
};

std::string to_string(Action a);

/**
Per-(M, i) cache of the DCF delay chain: task transmission delays, the
induced per-vehicle task rates, and the grid-wide maximum rate used by the
solver's normalization constant.
*/
struct RateTable {
    int k_max = 0;
    int n_max = 0;
    std::vector<double> task_rate;     // lambda_t(i; M), per second
    std::vector<double> task_delay_s;  // D_t(i; M), seconds
    double max_task_rate = 0.0;

    double lambda_t(int m_vehicles, int i_rus) const {
        return task_rate[(m_vehicles - 1) * n_max + (i_rus - 1)];
    }
    double task_delay_seconds(int m_vehicles, int i_rus) const {
        return task_delay_s[(m_vehicles - 1) * n_max + (i_rus - 1)];
    }
};

RateTable build_rate_table(const SystemConfig& config);

/// Warning strings for configurations whose offloading income can go
/// negative (local processing faster than some reachable offload delay).
std::vector<std::string> income_warnings(const SystemConfig& config,
                                         const RateTable& rates);

/// Weighting used for the expected task rate when no task is in service.
enum class ZeroOccupancyFallback { Uniform, FirstClass };

/// Occupancy convention for the holding-cost rate b(s, a).
enum class CostBasis { PostDecision, PreDecision };

struct ModelOptions {
    ZeroOccupancyFallback fallback = ZeroOccupancyFallback::Uniform;
    CostBasis cost_basis = CostBasis::PostDecision;
};

/// All live states in canonical order: lexicographic on
/// (M, n_1..n_N, event index). The terminal state is appended implicitly.
std::vector<SystemState> enumerate_states(const SystemConfig& config);

/// Feasible decisions at a live state. Throws for the terminal state
/// (callers never hold a SystemState for it).
std::vector<Action> feasible_actions(const SystemState& s, const SystemConfig& config);

/// Occupancy-weighted mean task rate, weights n_i / sum_j n_j, with the
/// configured fallback when the system is empty.
double expected_task_rate(const SystemState& s, const RateTable& rates,
                          ZeroOccupancyFallback fallback);

/// Total outgoing event rate sigma(s, a).
double expected_event_rate(const SystemState& s, Action a, const RateTable& rates,
                           const SystemConfig& config, ZeroOccupancyFallback fallback);

/// Immediate income I(s, a): saved-time value, drop or interruption penalty.
double income(const SystemState& s, Action a, const RateTable& rates,
              const SystemConfig& config);

/// Expected discounted holding cost until the next event,
/// b(s, a) / (alpha + sigma(s, a)).
double cost(const SystemState& s, Action a, const RateTable& rates,
            const SystemConfig& config, const ModelOptions& options = {});

struct Transition {
    int successor = 0;  // index into states, or terminal_index()
    double probability = 0.0;
};

struct ActionRow {
    Action action;
    double sigma = 0.0;      // outgoing event rate
    double income = 0.0;     // lump income at the decision epoch
    double cost_rate = 0.0;  // holding-cost rate b(s, a)
    double reward = 0.0;     // income - cost_rate / (alpha + sigma)
    bool terminal = false;   // the row absorbs (drop / interrupted task)
    std::vector<Transition> successors;

    bool to_terminal() const { return terminal; }
};

class TransitionTable {
public:
    SystemConfig config;
    ModelOptions options;
    RateTable rates;
    std::vector<SystemState> states;        // live states, canonical order
    std::vector<std::vector<ActionRow>> rows;  // parallel to states

    int terminal_index() const { return static_cast<int>(states.size()); }
    int state_count() const { return static_cast<int>(states.size()) + 1; }

    /// Index of a live state, or -1 when absent.
    int index_of(const SystemState& s) const;

    const ActionRow& row(int state_index, Action a) const;
};

/// Builds the dense model: states, feasible actions, rates, rewards and
/// successor distributions. Throws std::logic_error when a successor
/// distribution fails to sum to 1 within 1e-12.
TransitionTable build_model(const SystemConfig& config, const ModelOptions& options = {});

/// Plain-text dump, one line per (state, action, successor):
/// state tuple, action, sigma, reward, successor tuple, probability.
void write_table_dump(const TransitionTable& table, std::ostream& out);

}  // namespace vfc
