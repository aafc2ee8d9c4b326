#include "dynum/coordinator.hpp"

#include <chrono>
#include <thread>

#include "dynum/errors.hpp"

namespace dynum::proto {

namespace {

using Clock = std::chrono::steady_clock;

WireMessage make_window_advance(int site, int window, int alloc, int advance_epochs, bool refit) {
  WireMessage msg;
  msg.kind = MsgKind::WindowAdvance;
  msg.site = site;
  msg.window = window;
  msg.alloc = alloc;
  msg.advance_epochs = advance_epochs;
  msg.refit = refit;
  return msg;
}

}  // namespace

bool RemoteSite::send_msg(const WireMessage& msg) {
  const std::string line = encode(msg);
  if (tap_) tap_(line, true);
  return conn_.send_line(line);
}

bool RemoteSite::recv_matching(WireMessage& out, MsgKind kind, int window, int k) {
  std::string line;
  while (conn_.recv_line(line, opts_.io_timeout_ms)) {
    if (tap_) tap_(line + "\n", false);
    WireMessage msg;
    try {
      msg = decode_line(line);
    } catch (const std::exception&) {
      continue;  // tolerate noise; the retry loop re-requests if needed
    }
    if (msg.kind != kind) continue;
    if (msg.window != window) continue;
    if (k >= 0 && msg.k != k) continue;  // stale replies from an earlier attempt
    out = std::move(msg);
    return true;
  }
  return false;
}

bool RemoteSite::ensure_connected() {
  if (conn_.valid()) return true;
  conn_ = net::TcpConn::connect(opts_.endpoint);
  if (!conn_.valid()) return false;
  // Replay the full window history so a freshly (re)started agent rebuilds
  // its deterministic state before answering anything else.
  for (const HistoryEntry& h : history_) {
    if (!send_msg(make_window_advance(opts_.site_id, h.window, h.alloc, h.advance_epochs, h.refit))) {
      conn_.close();
      return false;
    }
    WireMessage reply;
    if (!recv_matching(reply, MsgKind::FbarReport, h.window, -1)) {
      conn_.close();
      return false;
    }
  }
  return true;
}

WireMessage RemoteSite::transact(const WireMessage& request, MsgKind expected) {
  const auto deadline = Clock::now() + std::chrono::milliseconds(opts_.deadline_ms);
  for (;;) {
    if (ensure_connected() && send_msg(request)) {
      WireMessage reply;
      if (recv_matching(reply, expected, request.window,
                        expected == MsgKind::Demand ? request.k : -1)) {
        return reply;
      }
    }
    conn_.close();
    if (Clock::now() >= deadline) {
      throw SiteUnavailable("site " + std::to_string(opts_.site_id) + " at " +
                            opts_.endpoint.host + ":" + std::to_string(opts_.endpoint.port) +
                            " unavailable");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(opts_.retry_interval_ms));
  }
}

fit::PwlUtility RemoteSite::window_advance(int window, int alloc, int advance_epochs, bool refit,
                                           WindowGroundStats* stats) {
  if (history_.empty() || history_.back().window < window) {
    history_.push_back(HistoryEntry{window, alloc, advance_epochs, refit});
  }
  const WireMessage reply = transact(
      make_window_advance(opts_.site_id, window, alloc, advance_epochs, refit), MsgKind::FbarReport);
  current_window_ = window;
  k_counter_ = 0;
  if (stats) {
    stats->realized_utility = reply.realized_utility;
    stats->epoch_rows = reply.epoch_rows;
  }
  fit::PwlUtility model = reply.fbar.value_or(fit::PwlUtility{});
  max_marginal_ = 0.0;
  for (const auto& a : model.anchors()) {
    for (double g : a.g) max_marginal_ = std::max(max_marginal_, g);
  }
  return model;
}

market::Vec RemoteSite::respond(const market::Vec& lambda) {
  WireMessage request;
  request.kind = MsgKind::Price;
  request.window = current_window_;
  request.k = k_counter_;  // reused verbatim across retries of this call
  request.lambda = lambda;
  const WireMessage reply = transact(request, MsgKind::Demand);
  ++k_counter_;
  return reply.y;
}

void RemoteSite::shutdown() {
  if (!conn_.valid() && !ensure_connected()) return;
  WireMessage msg;
  msg.kind = MsgKind::Shutdown;
  send_msg(msg);
  conn_.close();
}

}  // namespace dynum::proto
