#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gpb/model/gcn.hpp"
#include "gpb/prompt/prompt.hpp"

namespace gpb::bench {

// Container layout, little-endian:
//   "GPBCKPT\0"  u32 version  u8 kind  u64 config hash  u64 payload length
//   payload (JSON text)  u32 crc32 over every preceding byte
inline constexpr char kCheckpointMagic[8] = {'G', 'P', 'B', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ArtifactKind : std::uint8_t { encoder = 1, prompt = 2 };
std::string to_string(ArtifactKind k);

struct Container {
  ArtifactKind kind = ArtifactKind::encoder;
  std::uint32_t version = kCheckpointVersion;
  std::uint64_t config_hash = 0;
  std::string payload;
};

std::string encode_container(const Container& c);
// Throws IntegrityError on bad magic, truncation, length or checksum
// mismatch, and on an unsupported version.
Container decode_container(std::string_view bytes);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

struct PromptArtifact {
  prompt::TunedPrompt tuned;
  std::string pretext;  // of the encoder it was tuned against
};

template <class T>
struct Loaded {
  T value;
  std::uint64_t config_hash = 0;
  bool hash_mismatch = false;  // set when an expected hash was given and differs
};

void save_encoder(const std::filesystem::path& path, const model::PretrainedEncoder& enc,
                  std::uint64_t config_hash);
Loaded<model::PretrainedEncoder> load_encoder(const std::filesystem::path& path,
                                              std::optional<std::uint64_t> expected_hash = {});

void save_prompt(const std::filesystem::path& path, const PromptArtifact& artifact,
                 std::uint64_t config_hash);
Loaded<PromptArtifact> load_prompt(const std::filesystem::path& path,
                                   std::optional<std::uint64_t> expected_hash = {});

}  // namespace gpb::bench
