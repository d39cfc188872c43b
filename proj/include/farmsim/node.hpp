#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "farmsim/core.hpp"

namespace farmsim::nodesim {

/// Energy accounting constants in millijoules / milliwatts. Defaults are
/// calibrated so a node sampling every 30 minutes over a single SF7 hop
/// lasts about four months.
struct EnergyModel {
    double budget_mj = 64'800'000.0;
    double idle_mw = 5.0;
    double sample_mj = 2'000.0;
    double tx_mj_per_ms = 0.5;
    double offload_mj_per_reading = 5.0;

    friend bool operator==(const EnergyModel&, const EnergyModel&) = default;
};

constexpr std::size_t kDefaultBufferCapacity = 4096;

/// What a node does with a fresh reading.
enum class DispatchAction { Transmit, Buffer };

/// Mutable per-node simulation state: battery, sequence counter, and the
/// bounded store-and-forward buffer. Battery is monotone non-increasing;
/// once it reaches zero the node is dead and produces nothing further.
class NodeState {
public:
    NodeState() = default;
    NodeState(NodeId id, Connectivity conn, EnergyModel energy,
              std::size_t buffer_capacity = kDefaultBufferCapacity);

    NodeId id() const { return id_; }
    Connectivity connectivity() const { return connectivity_; }
    bool alive() const { return alive_; }
    double battery_mj() const { return battery_mj_; }
    double battery_pct() const;
    std::uint32_t next_seq() const { return next_seq_; }
    const std::deque<Reading>& buffer() const { return buffer_; }
    std::size_t buffer_capacity() const { return capacity_; }
    std::uint64_t buffer_overflow_drops() const { return overflow_drops_; }
    std::optional<SimTime> died_at() const { return died_at_; }

    /// Debit idle energy since the last event plus the sampling cost and
    /// claim the next sequence number. Returns the seq to use, or nullopt
    /// when the battery ran out (the node is dead afterwards).
    std::optional<std::uint32_t> begin_sample(SimTime t);

    /// Choose what to do with a reading: transmit when gateway-reachable,
    /// buffer when disconnected.
    DispatchAction dispatch(const Reading& r);

    /// Append to the store-and-forward buffer, evicting the oldest entry
    /// when full.
    void buffer_reading(const Reading& r);

    /// Debit transmit energy for airtime_ms. Returns false (and kills the
    /// node) when the battery cannot cover it; the frame is not sent.
    bool debit_transmit(SimTime t, double airtime_ms);

    /// Hand the full buffer to a drone in FIFO order and clear it. Energy
    /// is debited per transferred reading; the transfer itself always
    /// completes. Returns an empty vector for a dead node.
    std::vector<Reading> offload_to_drone(SimTime t);

    /// Idle-debit up to t without sampling (used at run end so lifetime
    /// reflects the whole horizon).
    void settle_idle(SimTime t);

private:
    void debit(SimTime t, double extra_mj);

    NodeId id_ = 0;
    Connectivity connectivity_ = Connectivity::GatewayReachable;
    EnergyModel energy_;
    std::size_t capacity_ = kDefaultBufferCapacity;
    double battery_mj_ = 0.0;
    bool alive_ = false;
    std::uint32_t next_seq_ = 0;
    SimTime last_event_ = 0;
    std::deque<Reading> buffer_;
    std::uint64_t overflow_drops_ = 0;
    std::optional<SimTime> died_at_;
};

} // namespace farmsim::nodesim
