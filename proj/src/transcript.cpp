#include "dpos/transcript.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dpos {

using nlohmann::json;

namespace {

constexpr const char* kAllowedKeys[] = {"n", "quote", "x", "pi", "d", "outcome"};

bool is_allowed_key(const std::string& key) {
  for (const char* k : kAllowedKeys) {
    if (key == k) return true;
  }
  return false;
}

// Returns an empty string when the record is valid.
std::string check_record(const json& j) {
  if (!j.is_object()) return "record is not a JSON object";
  for (const auto& item : j.items()) {
    if (!is_allowed_key(item.key())) return "unexpected field '" + item.key() + "'";
  }
  for (const char* k : kAllowedKeys) {
    if (!j.contains(k)) return std::string("missing field '") + k + "'";
  }
  if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) return "'n' must be a positive integer";
  if (!j["x"].is_number_integer()) return "'x' must be 0 or 1";
  const long long x = j["x"].get<long long>();
  if (x != 0 && x != 1) return "'x' must be 0 or 1";
  if (!j["pi"].is_number() || !(j["pi"].get<double>() >= 0.0)) return "'pi' must be a number >= 0";
  if (!j["outcome"].is_string()) return "'outcome' must be a string";
  const std::string outcome = j["outcome"].get<std::string>();
  if (outcome != "SUCC" && outcome != "FAIL" && outcome != "SKIP") return "unknown outcome";

  const json& quote = j["quote"];
  const json& d = j["d"];
  if (!quote.is_array() || !d.is_array()) return "'quote' and 'd' must be arrays";
  if (quote.size() != d.size() || quote.empty()) return "'quote' and 'd' lengths differ";
  double expected = 0.0;
  bool all_zero = true;
  for (std::size_t c = 0; c < d.size(); ++c) {
    if (!quote[c].is_number() || !d[c].is_number()) return "non-numeric price or demand";
    const double p = quote[c].get<double>();
    const double dc = d[c].get<double>();
    if (!std::isfinite(p) || !(dc >= 0.0)) return "invalid price or demand value";
    expected += p * dc;
    if (dc != 0.0) all_zero = false;
  }
  const double pi = j["pi"].get<double>();
  if (x == 0) {
    if (pi != 0.0 || !all_zero) return "declined record carries payment or demand";
    if (outcome != "SKIP") return "declined record must have outcome SKIP";
  } else {
    if (outcome == "SKIP") return "accepted record cannot be SKIP";
    if (std::abs(pi - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      return "payment does not match quoted prices";
    }
  }
  return {};
}

json to_json(const TranscriptEntry& e) {
  json j;
  j["n"] = e.quote.arrival;
  j["quote"] = e.quote.prices;
  j["x"] = e.decision.accept ? 1 : 0;
  j["pi"] = e.decision.payment;
  j["d"] = e.decision.demand;
  j["outcome"] = std::string(to_string(e.outcome.status));
  return j;
}

}  // namespace

std::string encode_transcript_entry(const TranscriptEntry& entry) { return to_json(entry).dump(); }

std::string encode_transcript(std::span<const TranscriptEntry> entries) {
  std::string out;
  for (const auto& e : entries) {
    out += encode_transcript_entry(e);
    out += '\n';
  }
  return out;
}

void write_transcript(std::ostream& out, std::span<const TranscriptEntry> entries) {
  for (const auto& e : entries) out << encode_transcript_entry(e) << '\n';
}

TranscriptEntry decode_transcript_entry(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(Errc::validation, std::string("malformed JSON: ") + e.what());
  }
  if (std::string why = check_record(j); !why.empty()) throw Error(Errc::validation, why);
  TranscriptEntry e;
  e.quote.arrival = j["n"].get<std::size_t>();
  e.quote.prices = j["quote"].get<std::vector<double>>();
  e.decision.accept = j["x"].get<int>() == 1;
  e.decision.payment = j["pi"].get<double>();
  e.decision.demand = j["d"].get<std::vector<double>>();
  e.outcome.status = parse_settle_status(j["outcome"].get<std::string>());
  e.outcome.refund = e.outcome.status == SettleStatus::fail ? e.decision.payment : 0.0;
  return e;
}

std::vector<TranscriptEntry> read_transcript(std::istream& in) {
  std::vector<TranscriptEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    entries.push_back(decode_transcript_entry(line));
  }
  return entries;
}

std::vector<SchemaViolation> validate_transcript(std::istream& in) {
  std::vector<SchemaViolation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      out.push_back({lineno, "malformed JSON"});
      continue;
    }
    if (std::string why = check_record(j); !why.empty()) out.push_back({lineno, why});
  }
  return out;
}

std::vector<SchemaViolation> validate_transcript_text(const std::string& text) {
  std::istringstream in(text);
  return validate_transcript(in);
}

std::size_t transcript_value_count(std::span<const TranscriptEntry> entries) {
  std::size_t count = 0;
  for (const auto& e : entries) count += e.quote.prices.size() + 2 + e.decision.demand.size() + 1;
  return count;
}

std::size_t transcript_bytes(std::span<const TranscriptEntry> entries) {
  return kBytesPerValue * transcript_value_count(entries);
}

std::size_t centralized_bytes(std::size_t tenants, std::size_t resources) {
  return kBytesPerValue * (tenants * resources + tenants + resources);
}

}  // namespace dpos
