#include "imb/resample_log.hpp"

#include <json.hpp>
#include <sstream>

#include "imb/error.hpp"

namespace imb {

using nlohmann::ordered_json;

std::string to_jsonl(const ResampleLog& log) {
  std::string out;
  for (const auto& e : log.entries) {
    ordered_json j;
    j["method"] = e.method;
    j["class"] = e.cls;
    j["parent"] = e.parent;
    j["neighbor"] = e.neighbor ? ordered_json(*e.neighbor) : ordered_json(nullptr);
    j["lambda"] = e.lambda;
    j["jitter"] = e.jitter ? ordered_json(*e.jitter) : ordered_json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

ResampleLog log_from_jsonl(const std::string& text) {
  ResampleLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      ResampleEntry e;
      e.method = j.at("method").get<std::string>();
      e.cls = j.at("class").get<std::uint32_t>();
      e.parent = j.at("parent").get<std::size_t>();
      if (!j.at("neighbor").is_null()) e.neighbor = j.at("neighbor").get<std::size_t>();
      e.lambda = j.at("lambda").get<double>();
      if (!j.at("jitter").is_null()) e.jitter = j.at("jitter").get<std::vector<double>>();
      log.entries.push_back(std::move(e));
    } catch (const ordered_json::exception& ex) {
      throw IoError(IoError::Kind::malformed,
                    "resample log line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return log;
}

}  // namespace imb
