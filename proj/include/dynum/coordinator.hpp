#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dynum/horizon.hpp"
#include "dynum/net.hpp"
#include "dynum/protocol.hpp"

namespace dynum::proto {

struct RemoteSiteOptions {
  net::Endpoint endpoint;
  int site_id = 0;
  int io_timeout_ms = 120000;      // per read; window replays re-simulate from scratch
  int retry_interval_ms = 100;
  int deadline_ms = 120000;        // total budget per request before SiteUnavailable
};

/// Observer for every line crossing the wire (schema audits, debug logs).
using WireTap = std::function<void(std::string_view line, bool outgoing)>;

/// Coordinator-side proxy for one site agent. Delivery is at-least-once: a
/// request is resent with the same (kind, k, window, site) until the matching
/// reply arrives. On reconnect the full window_advance history is replayed,
/// so a restarted agent deterministically rebuilds its state before
/// answering. Throws SiteUnavailable when the deadline is exhausted.
class RemoteSite final : public SiteHandle {
 public:
  explicit RemoteSite(RemoteSiteOptions opts) : opts_(std::move(opts)) {}

  void set_wire_tap(WireTap tap) { tap_ = std::move(tap); }

  fit::PwlUtility window_advance(int window, int alloc, int advance_epochs, bool refit,
                                 WindowGroundStats* stats) override;
  market::Vec respond(const market::Vec& lambda) override;
  double max_marginal() const override { return max_marginal_; }
  void shutdown() override;

 private:
  struct HistoryEntry {
    int window;
    int alloc;
    int advance_epochs;
    bool refit;
  };

  bool ensure_connected();
  bool send_msg(const WireMessage& msg);
  bool recv_matching(WireMessage& out, MsgKind kind, int window, int k);
  WireMessage transact(const WireMessage& request, MsgKind expected);

  RemoteSiteOptions opts_;
  net::TcpConn conn_;
  std::vector<HistoryEntry> history_;
  int current_window_ = -1;
  int k_counter_ = 0;
  double max_marginal_ = 1.0;
  WireTap tap_;
};

}  // namespace dynum::proto
