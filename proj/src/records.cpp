#include "ompfuzz/records.hpp"

#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace ompfuzz {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "OK";
    case RunStatus::Crash: return "CRASH";
    case RunStatus::Hang: return "HANG";
    case RunStatus::CompileFail: return "COMPILE_FAIL";
  }
  return "?";
}

RunStatus parse_status(std::string_view s) {
  if (s == "OK") return RunStatus::Ok;
  if (s == "CRASH") return RunStatus::Crash;
  if (s == "HANG") return RunStatus::Hang;
  if (s == "COMPILE_FAIL") return RunStatus::CompileFail;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

std::string to_json_line(const RunRecord& r) {
  json j;
  j["test"] = r.test;
  j["group"] = r.group;
  j["input"] = r.input;
  j["toolchain"] = r.toolchain;
  j["status"] = to_string(r.status);
  if (r.status == RunStatus::Ok) {
    j["time_us"] = r.time_us.value_or(0);
    j["comp"] = r.comp.value_or("");
  }
  j["exit"] = r.exit;
  return j.dump();
}

RunRecord parse_record(std::string_view line) {
  try {
    const json j = json::parse(line);
    RunRecord r;
    r.test = j.at("test").get<int>();
    r.group = j.at("group").get<int>();
    r.input = j.at("input").get<int>();
    r.toolchain = j.at("toolchain").get<std::string>();
    r.status = parse_status(j.at("status").get<std::string>());
    r.exit = j.value("exit", "");
    if (r.status == RunStatus::Ok) {
      r.time_us = j.at("time_us").get<std::int64_t>();
      r.comp = j.at("comp").get<std::string>();
    } else if (j.contains("time_us") || j.contains("comp")) {
      throw std::invalid_argument("time_us/comp present on a non-OK record");
    }
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed record: ") + e.what());
  }
}

namespace {

// Returns the records and the byte length of the complete-line prefix.
std::pair<std::vector<RunRecord>, std::uintmax_t> load(const fs::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return {out, 0};
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    ++line_no;
    const std::string_view line(text.data() + pos, nl - pos);
    if (!line.empty()) {
      try {
        out.push_back(parse_record(line));
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    pos = nl + 1;
  }
  return {out, pos};
}

}  // namespace

std::vector<RunRecord> read_records(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("missing record log " + path.string());
  return load(path).first;
}

RecordLog::RecordLog(fs::path path) : path_(std::move(path)) {
  if (fs::exists(path_)) {
    auto [records, good] = load(path_);
    if (good != fs::file_size(path_)) fs::resize_file(path_, good);
    for (auto& r : records) {
      if (keys_.insert(r.key()).second) records_.push_back(std::move(r));
    }
  } else if (path_.has_parent_path()) {
    fs::create_directories(path_.parent_path());
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw std::runtime_error("cannot open record log " + path_.string());
}

void RecordLog::append(const RunRecord& r) {
  if (!keys_.insert(r.key()).second) return;
  out_ << to_json_line(r) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("write failed on " + path_.string());
  records_.push_back(r);
}

}  // namespace ompfuzz
