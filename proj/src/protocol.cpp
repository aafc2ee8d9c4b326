#include "dynum/protocol.hpp"

#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dynum/errors.hpp"

namespace dynum::proto {

using nlohmann::json;

const char* kind_name(MsgKind kind) {
  switch (kind) {
    case MsgKind::Price: return "price";
    case MsgKind::Demand: return "demand";
    case MsgKind::FbarReport: return "fbar_report";
    case MsgKind::WindowAdvance: return "window_advance";
    case MsgKind::Shutdown: return "shutdown";
  }
  return "?";
}

namespace {

const std::unordered_map<std::string, MsgKind>& kind_table() {
  static const std::unordered_map<std::string, MsgKind> table = {
      {"price", MsgKind::Price},
      {"demand", MsgKind::Demand},
      {"fbar_report", MsgKind::FbarReport},
      {"window_advance", MsgKind::WindowAdvance},
      {"shutdown", MsgKind::Shutdown},
  };
  return table;
}

// Allowed keys per kind; decoding rejects anything else so the wire schema
// stays auditable.
const std::unordered_map<MsgKind, std::unordered_set<std::string>>& key_table() {
  static const std::unordered_map<MsgKind, std::unordered_set<std::string>> table = {
      {MsgKind::Price, {"v", "kind", "window", "k", "lambda"}},
      {MsgKind::Demand, {"v", "kind", "window", "k", "site", "y"}},
      {MsgKind::FbarReport,
       {"v", "kind", "window", "site", "cap", "anchors", "stale", "realized_utility",
        "epoch_rows"}},
      {MsgKind::WindowAdvance, {"v", "kind", "window", "site", "alloc", "advance", "refit"}},
      {MsgKind::Shutdown, {"v", "kind"}},
  };
  return table;
}

}  // namespace

std::string encode(const WireMessage& msg) {
  json j;
  j["v"] = msg.v;
  j["kind"] = kind_name(msg.kind);
  switch (msg.kind) {
    case MsgKind::Price:
      j["window"] = msg.window;
      j["k"] = msg.k;
      j["lambda"] = msg.lambda;
      break;
    case MsgKind::Demand:
      j["window"] = msg.window;
      j["k"] = msg.k;
      j["site"] = msg.site;
      j["y"] = msg.y;
      break;
    case MsgKind::FbarReport: {
      j["window"] = msg.window;
      j["site"] = msg.site;
      j["cap"] = msg.cap;
      j["stale"] = msg.stale;
      j["realized_utility"] = msg.realized_utility;
      j["epoch_rows"] = msg.epoch_rows;
      json anchors = json::array();
      if (msg.fbar) {
        for (const auto& a : msg.fbar->anchors()) {
          anchors.push_back(json{{"y", a.y}, {"u", a.u_hat}, {"g", a.g}});
        }
      }
      j["anchors"] = anchors;
      break;
    }
    case MsgKind::WindowAdvance:
      j["window"] = msg.window;
      j["site"] = msg.site;
      j["alloc"] = msg.alloc;
      j["advance"] = msg.advance_epochs;
      j["refit"] = msg.refit;
      break;
    case MsgKind::Shutdown:
      break;
  }
  return j.dump() + "\n";
}

WireMessage decode_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DecodeError("malformed record: " + std::string(e.what()), e.byte);
  }
  if (!j.is_object()) throw DecodeError("record is not an object", 0);
  if (!j.contains("v") || !j["v"].is_number_integer()) throw DecodeError("missing version", 0);
  if (j["v"].get<int>() != kProtocolVersion) {
    throw VersionError("unsupported protocol version " + j["v"].dump());
  }
  if (!j.contains("kind") || !j["kind"].is_string()) throw DecodeError("missing kind", 0);
  const auto it = kind_table().find(j["kind"].get<std::string>());
  if (it == kind_table().end()) {
    throw VersionError("unknown message kind " + j["kind"].dump());
  }

  WireMessage msg;
  msg.kind = it->second;
  const auto& allowed = key_table().at(msg.kind);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw DecodeError("unexpected field '" + key + "' in " + kind_name(msg.kind), 0);
    }
  }

  try {
    switch (msg.kind) {
      case MsgKind::Price:
        msg.window = j.at("window").get<int>();
        msg.k = j.at("k").get<int>();
        msg.lambda = j.at("lambda").get<std::vector<double>>();
        break;
      case MsgKind::Demand:
        msg.window = j.at("window").get<int>();
        msg.k = j.at("k").get<int>();
        msg.site = j.at("site").get<int>();
        msg.y = j.at("y").get<std::vector<double>>();
        break;
      case MsgKind::FbarReport: {
        msg.window = j.at("window").get<int>();
        msg.site = j.at("site").get<int>();
        msg.cap = j.at("cap").get<double>();
        msg.stale = j.value("stale", false);
        msg.realized_utility = j.value("realized_utility", 0.0);
        msg.epoch_rows = j.value("epoch_rows", std::vector<std::string>{});
        std::vector<fit::Anchor> anchors;
        for (const auto& a : j.at("anchors")) {
          fit::Anchor anchor;
          anchor.y = a.at("y").get<std::vector<double>>();
          anchor.u_hat = a.at("u").get<double>();
          anchor.g = a.at("g").get<std::vector<double>>();
          anchors.push_back(std::move(anchor));
        }
        if (!anchors.empty()) msg.fbar = fit::PwlUtility(std::move(anchors));
        break;
      }
      case MsgKind::WindowAdvance:
        msg.window = j.at("window").get<int>();
        msg.site = j.at("site").get<int>();
        msg.alloc = j.at("alloc").get<int>();
        msg.advance_epochs = j.at("advance").get<int>();
        msg.refit = j.at("refit").get<bool>();
        break;
      case MsgKind::Shutdown:
        break;
    }
  } catch (const json::exception& e) {
    throw DecodeError(std::string("bad field: ") + e.what(), 0);
  }
  return msg;
}

}  // namespace dynum::proto
