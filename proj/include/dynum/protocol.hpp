#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynum/concave_fit.hpp"

namespace dynum::proto {

constexpr int kProtocolVersion = 1;

enum class MsgKind { Price, Demand, FbarReport, WindowAdvance, Shutdown };

const char* kind_name(MsgKind kind);

/// One newline-delimited protocol record. (kind, k, window, site) identifies
/// a message; duplicate delivery is idempotent on both ends. Field-by-field
/// documentation lives in docs/protocol.md.
struct WireMessage {
  int v = kProtocolVersion;
  MsgKind kind = MsgKind::Shutdown;
  int window = -1;
  int k = -1;
  int site = -1;

  std::vector<double> lambda;  // price
  std::vector<double> y;       // demand

  int alloc = 0;  // window_advance: allocation in effect while advancing
  int advance_epochs = 0;
  bool refit = true;

  std::optional<fit::PwlUtility> fbar;  // fbar_report
  double cap = 0.0;
  bool stale = false;
  double realized_utility = 0.0;
  std::vector<std::string> epoch_rows;  // aggregate per-epoch counters only
};

/// Encodes one record as a single JSON line terminated by '\n'. Numeric
/// round-trip is exact.
std::string encode(const WireMessage& msg);

/// Decodes one line (without or with trailing newline). Throws DecodeError
/// (with byte offset) on malformed records and VersionError on unknown
/// version or kind; the connection survives either.
WireMessage decode_line(std::string_view line);

}  // namespace dynum::proto
