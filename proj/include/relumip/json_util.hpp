#ifndef RELUMIP_JSON_UTIL_HPP_
#define RELUMIP_JSON_UTIL_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace relumip {

const nlohmann::json& require(const nlohmann::json& obj, const char* key);
nlohmann::json parse_json(const std::string& text, const std::string& what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace relumip

#endif  // RELUMIP_JSON_UTIL_HPP_
