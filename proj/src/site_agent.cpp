#include "dynum/site_agent.hpp"

#include <cstdio>
#include <fstream>

#include "dynum/errors.hpp"
#include "dynum/protocol.hpp"

namespace dynum::proto {

namespace {

void log_agent(const SiteAgentOptions& opts, const std::string& what) {
  if (opts.verbose) std::fprintf(stderr, "[site %d] %s\n", opts.site_id, what.c_str());
}

}  // namespace

int serve_site(SiteRuntime& runtime, const SiteAgentOptions& opts) {
  net::TcpListener listener;
  listener.listen(opts.listen);
  std::fprintf(stderr, "[site %d] listening on %s:%d\n", opts.site_id, opts.listen.host.c_str(),
               listener.port());
  std::fflush(stderr);
  if (!opts.port_file.empty()) {
    std::ofstream pf(opts.port_file);
    pf << listener.port() << "\n";
  }

  int handled = 0;
  for (;;) {
    net::TcpConn conn = listener.accept(-1);
    if (!conn.valid()) continue;
    log_agent(opts, "coordinator connected");
    std::string line;
    while (conn.recv_line(line, opts.io_timeout_ms)) {
      WireMessage msg;
      try {
        msg = decode_line(line);
      } catch (const VersionError& e) {
        log_agent(opts, std::string("versioning error ignored: ") + e.what());
        continue;  // connection stays open
      } catch (const DecodeError& e) {
        log_agent(opts, std::string("decode error at byte ") + std::to_string(e.offset) + ": " +
                            e.what());
        continue;
      }

      if (opts.max_messages >= 0 && handled >= opts.max_messages) {
        // Simulated crash: drop the message unprocessed and exit.
        log_agent(opts, "max_messages reached; exiting before processing");
        return 0;
      }
      ++handled;

      switch (msg.kind) {
        case MsgKind::Price: {
          WireMessage reply;
          reply.kind = MsgKind::Demand;
          reply.window = msg.window;
          reply.k = msg.k;
          reply.site = opts.site_id;
          reply.y.reserve(msg.lambda.size());
          for (double l : msg.lambda) reply.y.push_back(runtime.respond_scalar(l));
          if (!conn.send_line(encode(reply))) conn.close();
          break;
        }
        case MsgKind::WindowAdvance: {
          WindowGroundStats stats;
          WireMessage reply;
          reply.kind = MsgKind::FbarReport;
          reply.window = msg.window;
          reply.site = opts.site_id;
          try {
            reply.fbar = runtime.window_advance(msg.window, msg.alloc, msg.advance_epochs,
                                                msg.refit, &stats);
          } catch (const ContractViolation& e) {
            log_agent(opts, std::string("window_advance rejected: ") + e.what());
            break;
          }
          reply.cap = static_cast<double>(runtime.grid_max());
          reply.realized_utility = stats.realized_utility;
          reply.epoch_rows = stats.epoch_rows;
          if (!conn.send_line(encode(reply))) conn.close();
          break;
        }
        case MsgKind::Shutdown:
          log_agent(opts, "shutdown received");
          return 0;
        case MsgKind::Demand:
        case MsgKind::FbarReport:
          log_agent(opts, "unexpected message kind ignored");
          break;
      }
    }
    log_agent(opts, "connection closed; waiting for reconnect");
  }
}

}  // namespace dynum::proto
