#pragma once

#include <string>

#include "dynum/horizon.hpp"
#include "dynum/net.hpp"

namespace dynum::proto {

struct SiteAgentOptions {
  net::Endpoint listen;
  int site_id = 0;
  /// Testing aid: exit cleanly after handling this many messages (the next
  /// one is dropped unprocessed), simulating a crash mid-iteration. -1 disables.
  int max_messages = -1;
  int io_timeout_ms = 60000;
  bool verbose = false;
  /// When set, the bound port is written here once listening (for harnesses
  /// that start agents on ephemeral ports).
  std::string port_file;
};

/// Long-running site agent: accepts one coordinator connection at a time and
/// answers price messages with primal responses and window_advance messages
/// with re-fitted surrogate reports. The agent reveals only demands and the
/// fitted surrogate, never node states, edges or policy internals. Handlers
/// are deterministic, so duplicate delivery is idempotent. Returns the
/// process exit code.
int serve_site(SiteRuntime& runtime, const SiteAgentOptions& opts);

}  // namespace dynum::proto
