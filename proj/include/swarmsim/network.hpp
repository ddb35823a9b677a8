#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "swarmsim/rng.hpp"

namespace swarmsim {

struct NetworkConfig {
  double loss_prob = 0.0;
};

struct Message {
  int sender = 0;
  int strategy = 0;
  int bit = 0;
};

struct Inboxes {
  std::vector<std::vector<Message>> pending;   // filled by broadcasts this step
  std::vector<std::vector<Message>> readable;  // drained this step

  explicit Inboxes(int n = 0) : pending(n), readable(n) {}

  // Messages become readable one step after they were sent.
  void roll() {
    for (std::size_t i = 0; i < pending.size(); ++i) {
      readable[i] = std::move(pending[i]);
      pending[i].clear();
    }
  }
};

struct BroadcastRecord {
  std::uint64_t delivered_mask = 0;
  int delivered = 0;
  int dropped = 0;
};

// Sends to every robot except the sender, each copy dropped independently
// with probability loss_prob; recipients are visited in id order.
inline BroadcastRecord broadcast(const Message& msg, int swarm_size, double loss_prob,
                                 Rng& sender_rng, Inboxes& inboxes) {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
    throw std::invalid_argument("broadcast: loss_prob must be in [0, 1]");
  BroadcastRecord rec;
  for (int r = 0; r < swarm_size; ++r) {
    if (r == msg.sender) continue;
    const bool dropped = loss_prob > 0.0 && sender_rng.bernoulli(loss_prob);
    if (dropped) {
      ++rec.dropped;
    } else {
      inboxes.pending[static_cast<std::size_t>(r)].push_back(msg);
      rec.delivered_mask |= std::uint64_t{1} << r;
      ++rec.delivered;
    }
  }
  return rec;
}

}  // namespace swarmsim
