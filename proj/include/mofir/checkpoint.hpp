#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mofir {

/// Binary container shared by embeddings and agent checkpoints:
///   "MOFIR1" | { u32 name_len | name bytes | u64 count | f32 x count }*
/// All integers and floats little-endian; records run until end of file.
inline constexpr std::string_view kCheckpointMagic = "MOFIR1";

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kCorrupt, kVersionMismatch, kSchema };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Record {
  std::string name;
  std::vector<float> values;
};

std::string encode_records(std::span<const Record> records);
std::vector<Record> decode_records(std::string_view bytes);

void write_records(const std::filesystem::path& path, std::span<const Record> records);
std::vector<Record> read_records(const std::filesystem::path& path);

/// Looks a record up by name; throws kSchema when absent or when
/// `expected_count` is given and differs.
const Record& find_record(std::span<const Record> records, std::string_view name,
                          std::size_t expected_count = static_cast<std::size_t>(-1));

/// FNV-1a over the encoded bytes; used to prove a checkpoint was not touched.
std::uint64_t fingerprint(std::string_view bytes);

}  // namespace mofir
