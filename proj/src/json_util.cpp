#include "relumip/json_util.hpp"

#include <fstream>
#include <sstream>

#include "relumip/errors.hpp"

namespace relumip {

const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(std::string("missing field '") + key + "'");
  return obj.at(key);
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  // Missing parent directories are created; failure shows up as an open error below.
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace relumip
