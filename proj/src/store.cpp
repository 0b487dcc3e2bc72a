#include "agribot/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include <json.hpp>

#include "agribot/recommend.hpp"
#include "agribot/wire.hpp"
#include "file_util.hpp"

namespace agribot {

namespace {

using Json = nlohmann::json;

StoreError io_error(const std::string& what) {
  return StoreError(StoreError::Code::IoFailure, what + ": " + std::strerror(errno));
}

StoreError schema_error(Stream stream, const std::string& what) {
  return StoreError(StoreError::Code::SchemaMismatch,
                    std::string(to_string(stream)) + " record: " + what);
}

void check_string(const Json& j, const char* key, Stream s) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw schema_error(s, std::string("missing or non-string '") + key + "'");
  }
}

void check_int(const Json& j, const char* key, Stream s) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw schema_error(s, std::string("missing or non-integer '") + key + "'");
  }
}

void check_bool(const Json& j, const char* key, Stream s) {
  if (!j.contains(key) || !j[key].is_boolean()) {
    throw schema_error(s, std::string("missing or non-boolean '") + key + "'");
  }
}

void check_one_of(const Json& j, const char* key, std::initializer_list<std::string_view> values,
                  Stream s) {
  check_string(j, key, s);
  const auto v = j[key].get<std::string>();
  for (auto allowed : values) {
    if (v == allowed) return;
  }
  throw schema_error(s, std::string("bad value for '") + key + "': " + v);
}

// Parses one newline-free line; nullopt when it is not a well-formed record.
std::optional<Record> parse_line(Stream stream, std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.size() != 3 || !j.contains("seq") || !j["seq"].is_number_integer() ||
      !j.contains("ts") || !j["ts"].is_number_integer() || !j.contains("body")) {
    return std::nullopt;
  }
  Record r;
  r.seq = j["seq"].get<std::int64_t>();
  r.ts = j["ts"].get<std::int64_t>();
  const std::string prefix =
      "{\"seq\":" + std::to_string(r.seq) + ",\"ts\":" + std::to_string(r.ts) + ",\"body\":";
  if (line.size() < prefix.size() + 1 || line.substr(0, prefix.size()) != prefix ||
      line.back() != '}') {
    return std::nullopt;
  }
  r.body = std::string(line.substr(prefix.size(), line.size() - prefix.size() - 1));
  try {
    check_schema(stream, r.body);
  } catch (const StoreError&) {
    return std::nullopt;
  }
  if (stream == Stream::TELEMETRY && decode_snapshot(r.body).ts != r.ts) return std::nullopt;
  return r;
}

void write_all(int fd, std::string_view data, const std::string& what) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw io_error("write " + what);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string_view to_string(Stream stream) {
  switch (stream) {
    case Stream::SESSIONS: return "sessions";
    case Stream::TELEMETRY: return "telemetry";
    case Stream::TRANSCRIPT: return "transcript";
    case Stream::AUDIT: return "audit";
  }
  return "?";
}

std::optional<Stream> parse_stream(std::string_view name) {
  for (auto s : kAllStreams) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string file_name(Stream stream) { return std::string(to_string(stream)) + ".log"; }

std::string format_record(const Record& r) {
  return "{\"seq\":" + std::to_string(r.seq) + ",\"ts\":" + std::to_string(r.ts) +
         ",\"body\":" + r.body + "}";
}

void check_schema(Stream stream, std::string_view body) {
  if (body.find('\n') != std::string_view::npos) throw schema_error(stream, "body spans lines");
  switch (stream) {
    case Stream::TELEMETRY:
      try {
        decode_snapshot(body);
      } catch (const std::invalid_argument& e) {
        throw schema_error(stream, e.what());
      }
      return;
    case Stream::TRANSCRIPT:
      try {
        decode_message(body);
      } catch (const ProtocolError& e) {
        throw schema_error(stream, e.what());
      }
      return;
    case Stream::SESSIONS:
    case Stream::AUDIT:
      break;
  }

  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw schema_error(stream, e.what());
  }
  if (!j.is_object()) throw schema_error(stream, "body is not an object");
  check_string(j, "user_id", stream);
  if (stream == Stream::SESSIONS) {
    check_bool(j, "active", stream);
    check_int(j, "started_at", stream);
    check_one_of(j, "last_page", {"MAIN", "DRIP", "MIST", "MONITOR"}, stream);
  } else {
    check_int(j, "ts", stream);
    check_one_of(j, "target", {"DRIP", "MIST"}, stream);
    check_one_of(j, "desired", {"ON", "OFF"}, stream);
    check_bool(j, "changed", stream);
  }
}

RecoveredStream recover_stream(Stream stream, std::string_view bytes) {
  RecoveredStream out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto nl = bytes.find('\n', pos);
    const bool terminated = nl != std::string_view::npos;
    const std::size_t end = terminated ? nl : bytes.size();
    const bool last = !terminated || nl + 1 == bytes.size();
    const std::string_view line = bytes.substr(pos, end - pos);

    std::optional<Record> rec;
    if (terminated) rec = parse_line(stream, line);
    const std::int64_t expected = static_cast<std::int64_t>(out.records.size()) + 1;
    if (rec && rec->seq != expected) rec.reset();

    if (!rec) {
      if (!last) {
        throw StoreError(StoreError::Code::CorruptFile,
                         file_name(stream) + ": malformed record at byte " + std::to_string(pos));
      }
      out.warnings.push_back(file_name(stream) + ": dropped " +
                             (terminated ? "malformed" : "partial") + " trailing record (" +
                             std::to_string(bytes.size() - pos) + " bytes)");
      break;
    }
    out.records.push_back(std::move(*rec));
    pos = end + 1;
    out.valid_bytes = pos;
  }
  return out;
}

Store::Store(std::filesystem::path dir, StoreOptions options)
    : dir_(std::move(dir)), options_(options) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) {
    throw StoreError(StoreError::Code::IoFailure,
                     "cannot create " + dir_.string() + ": " + ec.message());
  }
  recover();
}

Store::~Store() { close_all(); }

void Store::close_all() noexcept {
  for (auto& f : files_) {
    if (f.fd >= 0) ::close(f.fd);
    f.fd = -1;
  }
}

void Store::recover() {
  std::unique_lock lock(mu_);
  close_all();
  warnings_.clear();
  for (auto s : kAllStreams) {
    const auto path = dir_ / file_name(s);
    std::string bytes;
    if (std::filesystem::exists(path)) {
      try {
        bytes = detail::read_text_file(path);
      } catch (const std::exception& e) {
        throw StoreError(StoreError::Code::IoFailure, e.what());
      }
    }
    RecoveredStream rec = recover_stream(s, bytes);
    if (rec.valid_bytes < bytes.size()) {
      if (::truncate(path.c_str(), static_cast<off_t>(rec.valid_bytes)) != 0) {
        throw io_error("truncate " + path.string());
      }
    }
    warnings_.insert(warnings_.end(), rec.warnings.begin(), rec.warnings.end());

    StreamFile& f = file(s);
    f.records = std::move(rec.records);
    f.fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (f.fd < 0) throw io_error("open " + path.string());
  }
}

std::int64_t Store::append(Stream stream, std::int64_t ts, std::string_view body) {
  check_schema(stream, body);
  if (stream == Stream::TELEMETRY && decode_snapshot(body).ts != ts) {
    throw schema_error(stream, "record ts differs from snapshot ts");
  }
  std::unique_lock lock(mu_);
  StreamFile& f = file(stream);
  Record r{static_cast<std::int64_t>(f.records.size()) + 1, ts, std::string(body)};
  const std::string line = format_record(r) + "\n";
  write_all(f.fd, line, file_name(stream));
  if (options_.sync && ::fdatasync(f.fd) != 0) throw io_error("fdatasync " + file_name(stream));
  f.records.push_back(std::move(r));
  return f.records.back().seq;
}

std::vector<Record> Store::query(Stream stream, std::int64_t from_ts, std::int64_t to_ts) const {
  if (from_ts > to_ts) {
    throw StoreError(StoreError::Code::BadRange, "from_ts " + std::to_string(from_ts) +
                                                     " is after to_ts " + std::to_string(to_ts));
  }
  std::shared_lock lock(mu_);
  std::vector<Record> out;
  for (const auto& r : file(stream).records) {
    if (r.ts >= from_ts && r.ts <= to_ts) out.push_back(r);
  }
  return out;
}

std::vector<Record> Store::records(Stream stream) const {
  std::shared_lock lock(mu_);
  return file(stream).records;
}

std::int64_t Store::last_seq(Stream stream) const {
  std::shared_lock lock(mu_);
  return static_cast<std::int64_t>(file(stream).records.size());
}

std::vector<std::string> Store::warnings() const {
  std::shared_lock lock(mu_);
  return warnings_;
}

}  // namespace agribot
