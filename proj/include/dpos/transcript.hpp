#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpos/protocol.hpp"

namespace dpos {

/// JSONL persistence of session transcripts. One record per arrival:
///   {"n": int, "quote": [..], "x": 0|1, "pi": float, "d": [..], "outcome": "SUCC"|"FAIL"|"SKIP"}
std::string encode_transcript_entry(const TranscriptEntry& entry);
std::string encode_transcript(std::span<const TranscriptEntry> entries);
void write_transcript(std::ostream& out, std::span<const TranscriptEntry> entries);

/// Parses one record; throws Errc::validation if it fails the schema.
TranscriptEntry decode_transcript_entry(const std::string& line);
std::vector<TranscriptEntry> read_transcript(std::istream& in);

struct SchemaViolation {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

/// Checks every line against the transcript schema. Records carrying any
/// key outside the six allowed ones (valuations, subscriber data, QoS
/// fields, ...) are rejected, as are records whose decision tuple is
/// internally inconsistent.
std::vector<SchemaViolation> validate_transcript(std::istream& in);
std::vector<SchemaViolation> validate_transcript_text(const std::string& text);

/// Numeric values exchanged per arrival: quote (C) + x + pi + d (C) + outcome.
std::size_t transcript_value_count(std::span<const TranscriptEntry> entries);

/// Data-size accounting at 4 bytes per transferred value.
inline constexpr std::size_t kBytesPerValue = 4;
std::size_t transcript_bytes(std::span<const TranscriptEntry> entries);

/// Bytes of the whole centralized problem (N*C demands, N valuations,
/// C cost coefficients) under the same convention.
std::size_t centralized_bytes(std::size_t tenants, std::size_t resources);

}  // namespace dpos
