#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace ompfuzz {

enum class RunStatus { Ok, Crash, Hang, CompileFail };

std::string_view to_string(RunStatus s);
/// Accepts the record spelling (OK, CRASH, HANG, COMPILE_FAIL).
RunStatus parse_status(std::string_view s);

struct RunRecord {
  int test = 0;
  int group = 0;
  int input = 0;
  std::string toolchain;
  RunStatus status = RunStatus::Ok;
  std::optional<std::int64_t> time_us;  // OK only
  std::optional<std::string> comp;      // OK only, exactly as printed
  std::string exit;                     // "exit 0", "signal 11 (...)", "timeout", "compile"

  using Key = std::tuple<int, int, int, std::string>;  // group, test, input, toolchain
  [[nodiscard]] Key key() const { return {group, test, input, toolchain}; }
  bool operator==(const RunRecord&) const = default;
};

std::string to_json_line(const RunRecord& r);
/// Throws std::invalid_argument on malformed lines.
RunRecord parse_record(std::string_view line);

/// Every complete record in the log. A torn final line (no newline) is
/// ignored.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Append-only record log. Opening truncates a torn final line left by a
/// killed writer, so resumed campaigns never duplicate or corrupt records.
class RecordLog {
 public:
  explicit RecordLog(std::filesystem::path path);

  [[nodiscard]] bool contains(const RunRecord::Key& key) const { return keys_.contains(key); }
  [[nodiscard]] std::size_t size() const { return keys_.size(); }
  [[nodiscard]] const std::vector<RunRecord>& records() const { return records_; }

  /// Writes and flushes one line. Duplicate keys are ignored.
  void append(const RunRecord& r);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::set<RunRecord::Key> keys_;
  std::vector<RunRecord> records_;
};

}  // namespace ompfuzz
