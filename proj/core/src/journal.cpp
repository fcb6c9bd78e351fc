#include "vidcurate/journal.hpp"

#include <fcntl.h>
#include <fmt/format.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vidcurate/error.hpp"

namespace vidcurate {

namespace fs = std::filesystem;

namespace {

std::uint32_t checksum(std::string_view payload) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

[[noreturn]] void io_fail(const fs::path& p, std::string_view what) {
  throw Error(Errc::IoError, fmt::format("{}: {}: {}", p.string(), what, std::strerror(errno)));
}

void write_all(int fd, std::string_view data, const fs::path& p) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail(p, "write");
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_dir(const fs::path& dir) {
  const int dfd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (dfd >= 0) {
    ::fsync(dfd);
    ::close(dfd);
  }
}

/// Parses `<8 hex> <payload>`; false when the checksum does not match.
bool decode_line(std::string_view line, std::string& payload) {
  if (line.size() < 9 || line[8] != ' ') return false;
  std::uint32_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    const char c = line[static_cast<std::size_t>(i)];
    std::uint32_t v;
    if (c >= '0' && c <= '9') {
      v = static_cast<std::uint32_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v = static_cast<std::uint32_t>(c - 'a' + 10);
    } else {
      return false;
    }
    stored = (stored << 4) | v;
  }
  const std::string_view body = line.substr(9);
  if (checksum(body) != stored) return false;
  payload.assign(body);
  return true;
}

}  // namespace

std::string Journal::frame(std::string_view payload) {
  return fmt::format("{:08x} {}\n", checksum(payload), payload);
}

Journal::Journal(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  load();
  open_for_append();
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::load() {
  records_.clear();
  if (!fs::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) io_fail(path_, "open for replay");
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    std::string payload;
    if (!decode_line(std::string_view(data).substr(pos, nl - pos), payload)) {
      if (nl + 1 < data.size()) {
        throw Error(Errc::IoError,
                    fmt::format("{}: corrupt record at byte {}", path_.string(), pos));
      }
      break;  // damaged final record
    }
    records_.push_back(std::move(payload));
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < data.size()) {
    truncated_bytes_ = data.size() - good_end;
    std::error_code ec;
    fs::resize_file(path_, good_end, ec);
    if (ec) throw Error(Errc::IoError, fmt::format("{}: truncate: {}", path_.string(), ec.message()));
  }
}

void Journal::open_for_append() {
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_fail(path_, "open for append");
}

void Journal::append(std::string_view payload) {
  if (payload.find('\n') != std::string_view::npos) {
    throw Error(Errc::ValidationError, "journal payload contains a newline");
  }
  write_all(fd_, frame(payload), path_);
  if (::fdatasync(fd_) != 0) io_fail(path_, "fdatasync");
  records_.emplace_back(payload);
}

void Journal::compact(std::span<const std::string> payloads) {
  const fs::path tmp = path_.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail(tmp, "open");
  try {
    for (const auto& p : payloads) write_all(fd, frame(p), tmp);
    if (::fsync(fd) != 0) io_fail(tmp, "fsync");
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path_.c_str()) != 0) io_fail(path_, "rename");
  sync_dir(path_.parent_path());
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  open_for_append();
  records_.assign(payloads.begin(), payloads.end());
}

}  // namespace vidcurate
