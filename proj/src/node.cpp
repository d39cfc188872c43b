#include "farmsim/node.hpp"

#include <algorithm>

namespace farmsim::nodesim {

NodeState::NodeState(NodeId id, Connectivity conn, EnergyModel energy,
                     std::size_t buffer_capacity)
    : id_(id),
      connectivity_(conn),
      energy_(energy),
      capacity_(std::max<std::size_t>(1, buffer_capacity)),
      battery_mj_(energy.budget_mj),
      alive_(energy.budget_mj > 0.0) {}

double NodeState::battery_pct() const {
    if (energy_.budget_mj <= 0.0) return 0.0;
    return 100.0 * battery_mj_ / energy_.budget_mj;
}

void NodeState::debit(SimTime t, double extra_mj) {
    double idle = energy_.idle_mw * static_cast<double>(t - last_event_);
    double total = idle + extra_mj;
    last_event_ = t;
    if (total >= battery_mj_) {
        battery_mj_ = 0.0;
        if (alive_) {
            alive_ = false;
            died_at_ = t;
        }
        return;
    }
    battery_mj_ -= total;
}

std::optional<std::uint32_t> NodeState::begin_sample(SimTime t) {
    if (!alive_) return std::nullopt;
    debit(t, energy_.sample_mj);
    if (!alive_) return std::nullopt;
    return next_seq_++;
}

DispatchAction NodeState::dispatch(const Reading&) {
    return connectivity_ == Connectivity::GatewayReachable ? DispatchAction::Transmit
                                                           : DispatchAction::Buffer;
}

void NodeState::buffer_reading(const Reading& r) {
    if (buffer_.size() == capacity_) {
        buffer_.pop_front();
        ++overflow_drops_;
    }
    buffer_.push_back(r);
}

bool NodeState::debit_transmit(SimTime t, double airtime_ms) {
    if (!alive_) return false;
    debit(t, energy_.tx_mj_per_ms * airtime_ms);
    return alive_;
}

std::vector<Reading> NodeState::offload_to_drone(SimTime t) {
    if (!alive_) return {};
    std::vector<Reading> out(buffer_.begin(), buffer_.end());
    buffer_.clear();
    // transfer completes even if it exhausts the battery
    debit(t, energy_.offload_mj_per_reading * static_cast<double>(out.size()));
    return out;
}

void NodeState::settle_idle(SimTime t) {
    if (!alive_ || t <= last_event_) return;
    debit(t, 0.0);
}

} // namespace farmsim::nodesim
