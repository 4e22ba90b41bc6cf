#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace shellsig {

// All serialized documents use insertion-ordered JSON so files come out in a
// stable, human-diffable key order. Numbers round-trip exactly (shortest
// representation that parses back to the same double).
using Json = nlohmann::ordered_json;

// Reads a whole file; throws IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes content to a temp file in the target directory and renames it into
// place, so a crash never leaves a partially written artifact behind.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

// Parses JSON text, converting library exceptions into ParseError.
Json parse_json(std::string_view text, const std::string& what);

// FNV-1a 64-bit hash, hex-encoded. Used for config digests and the payload
// bundle manifest. Stable across platforms.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Deterministic seed mixing (splitmix64 finalizer). Used to derive
// independent per-class / per-cell RNG streams from one user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace shellsig
