#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tethernet/config.hpp"

namespace tethernet {

// Exit-code taxonomy shared by the CLI and the readers below:
//   2 missing file, 3 schema-version mismatch, 4 width/variant mismatch,
//   5 invalid config (ConfigError, config.hpp), 1 anything else.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr int kSurrogateSchemaVersion = 1;
inline constexpr int kPolicySchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr uint32_t kDatasetVersion = 1;

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write file: " + path);
  out << text;
}

inline Json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FileError("cannot parse JSON in " + path + ": " + e.what());
  }
}

inline void check_schema_version(const Json& j, int expected, const std::string& what) {
  if (!j.contains("schema_version"))
    throw SchemaError(what + ": missing schema_version");
  const int got = j.at("schema_version").get<int>();
  if (got != expected)
    throw SchemaError(what + ": schema_version " + std::to_string(got) +
                      " unsupported (expected " + std::to_string(expected) + ")");
}

// Line-delimited JSON stream; one record per line, flushed on close.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    out_.open(path, std::ios::binary);
    if (!out_) throw FileError("cannot write file: " + path);
  }

  void write(const Json& j) { out_ << j.dump() << '\n'; }

 private:
  std::ofstream out_;
};

inline std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open file: " + path);
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(Json::parse(line));
  }
  return out;
}

}  // namespace tethernet
