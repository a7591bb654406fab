#include "mofir/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mofir {
namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
  if (bytes.size() - pos < sizeof(T)) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          "checkpoint truncated at byte " + std::to_string(pos));
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  pos += sizeof(T);
  return value;
}

}  // namespace

std::string encode_records(std::span<const Record> records) {
  std::string out(kCheckpointMagic);
  for (const auto& r : records) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    put_le<std::uint64_t>(out, r.values.size());
    for (float v : r.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<Record> decode_records(std::string_view bytes) {
  if (bytes.size() < kCheckpointMagic.size()) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt, "checkpoint shorter than its header");
  }
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw CheckpointError(CheckpointError::Kind::kVersionMismatch,
                          "unrecognised checkpoint header (expected MOFIR1)");
  }
  std::size_t pos = kCheckpointMagic.size();
  std::vector<Record> records;
  while (pos < bytes.size()) {
    Record r;
    auto name_len = get_le<std::uint32_t>(bytes, pos);
    if (bytes.size() - pos < name_len) {
      throw CheckpointError(CheckpointError::Kind::kCorrupt, "checkpoint truncated inside a record name");
    }
    r.name.assign(bytes.substr(pos, name_len));
    pos += name_len;
    auto count = get_le<std::uint64_t>(bytes, pos);
    if ((bytes.size() - pos) / 4 < count) {
      throw CheckpointError(CheckpointError::Kind::kCorrupt,
                            "record '" + r.name + "' declares " + std::to_string(count) +
                                " values but the file ends early");
    }
    r.values.resize(count);
    for (auto& v : r.values) v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
    records.push_back(std::move(r));
  }
  return records;
}

void write_records(const std::filesystem::path& path, std::span<const Record> records) {
  std::string bytes = encode_records(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "short write to '" + path.string() + "'");
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_records(buf.view());
}

const Record& find_record(std::span<const Record> records, std::string_view name,
                          std::size_t expected_count) {
  for (const auto& r : records) {
    if (r.name != name) continue;
    if (expected_count != static_cast<std::size_t>(-1) && r.values.size() != expected_count) {
      throw CheckpointError(CheckpointError::Kind::kSchema,
                            "record '" + r.name + "' has " + std::to_string(r.values.size()) +
                                " values, expected " + std::to_string(expected_count));
    }
    return r;
  }
  throw CheckpointError(CheckpointError::Kind::kSchema, "missing record '" + std::string(name) + "'");
}

std::uint64_t fingerprint(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace mofir
