#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidcurate {

/// Append-only record log. Each record is one line `<crc32 hex> <payload>`;
/// append() returns only after the bytes are flushed to stable storage.
///
/// On open, a torn final record (no newline, or bad checksum on the last line)
/// is truncated away. A bad checksum anywhere else is Errc::IoError: the file is
/// damaged and replay would lose acknowledged mutations.
class Journal {
 public:
  explicit Journal(std::filesystem::path path);
  ~Journal();

  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  /// Payloads of all intact records, in append order.
  [[nodiscard]] const std::vector<std::string>& records() const noexcept { return records_; }

  /// Payload must not contain '\n'. Errc::IoError on write or sync failure.
  void append(std::string_view payload);

  /// Atomically replaces the log with `payloads` (temp file + fsync + rename).
  void compact(std::span<const std::string> payloads);

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] std::size_t truncated_bytes() const noexcept { return truncated_bytes_; }

  static std::string frame(std::string_view payload);

 private:
  void open_for_append();
  void load();

  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<std::string> records_;
  std::size_t truncated_bytes_ = 0;
};

}  // namespace vidcurate
