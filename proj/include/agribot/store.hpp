#pragma once

// Append-only persistence: one file per stream, one record per line.
//
//   {"seq":N,"ts":N,"body":<frame>}\n
//
// seq starts at 1 and increases by exactly one per stream. A record is durable
// once append() returns (fdatasync unless StoreOptions::sync is off).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agribot {

enum class Stream { SESSIONS, TELEMETRY, TRANSCRIPT, AUDIT };

inline constexpr Stream kAllStreams[] = {Stream::SESSIONS, Stream::TELEMETRY,
                                         Stream::TRANSCRIPT, Stream::AUDIT};

std::string_view to_string(Stream stream);  // "sessions", "telemetry", ...
std::optional<Stream> parse_stream(std::string_view name);
std::string file_name(Stream stream);       // "<name>.log"

class StoreError : public std::runtime_error {
 public:
  enum class Code { IoFailure, SchemaMismatch, BadRange, CorruptFile };

  StoreError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct Record {
  std::int64_t seq = 0;
  std::int64_t ts = 0;
  std::string body;  // the frame exactly as stored

  friend bool operator==(const Record&, const Record&) = default;
};

std::string format_record(const Record& record);  // without the trailing newline

// Throws StoreError(SchemaMismatch) when `body` is not a valid frame for `stream`.
void check_schema(Stream stream, std::string_view body);

struct RecoveredStream {
  std::vector<Record> records;
  std::vector<std::string> warnings;
  std::size_t valid_bytes = 0;  // length of the prefix holding `records`
};

// Scans raw file bytes. The last record may be torn or malformed and is then
// dropped with a warning; a malformed record anywhere else throws CorruptFile.
RecoveredStream recover_stream(Stream stream, std::string_view bytes);

struct StoreOptions {
  bool sync = true;
};

class Store {
 public:
  explicit Store(std::filesystem::path dir, StoreOptions options = {});
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::int64_t append(Stream stream, std::int64_t ts, std::string_view body);

  // Records with from_ts <= ts <= to_ts, in seq order.
  std::vector<Record> query(Stream stream, std::int64_t from_ts, std::int64_t to_ts) const;

  std::vector<Record> records(Stream stream) const;
  std::int64_t last_seq(Stream stream) const;

  // Re-reads every stream file, truncating a torn tail so appends resume cleanly.
  void recover();

  std::vector<std::string> warnings() const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  struct StreamFile {
    int fd = -1;
    std::vector<Record> records;
  };

  StreamFile& file(Stream s) { return files_[static_cast<int>(s)]; }
  const StreamFile& file(Stream s) const { return files_[static_cast<int>(s)]; }
  void close_all() noexcept;

  std::filesystem::path dir_;
  StoreOptions options_;
  mutable std::shared_mutex mu_;
  StreamFile files_[4];
  std::vector<std::string> warnings_;
};

}  // namespace agribot
