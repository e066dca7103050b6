#include <fstream>
#include <sstream>

#include "affectfuse/error.hpp"
#include "affectfuse/llm.hpp"

namespace affectfuse::llm {

CacheStore::CacheStore(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_, std::ios::binary);
  if (!in) return;
  std::stringstream ss;
  ss << in.rdbuf();
  in.close();
  const std::string content = ss.str();

  // (offset, length) of every non-empty line.
  std::vector<std::pair<std::size_t, std::size_t>> lines;
  for (std::size_t pos = 0; pos < content.size();) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    if (end > pos) lines.emplace_back(pos, end - pos);
    pos = end + 1;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto [offset, length] = lines[i];
    ChatRecord record;
    try {
      record = record_from_json_line(std::string_view(content).substr(offset, length));
    } catch (const std::exception& e) {
      // An interrupted append leaves at most one partial trailing line. Cut
      // it off so the next append starts on a clean line.
      if (i + 1 == lines.size()) {
        std::filesystem::resize_file(file_, offset);
        return;
      }
      throw ParseError(i, "corrupt cache line in '" + file_.string() + "': " + e.what());
    }
    ++lines_;
    index_.try_emplace(record.params_digest, std::move(record));
  }
  if (!content.empty() && content.back() != '\n') {
    std::ofstream(file_, std::ios::binary | std::ios::app) << '\n';
  }
}

std::optional<ChatRecord> CacheStore::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CacheStore::put(const ChatRecord& record) {
  std::lock_guard lock(mutex_);
  if (!file_.empty()) {
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    out << to_json_line(record) << '\n';
    out.flush();
    if (!out) throw Error("failed to append to cache file '" + file_.string() + "'");
  }
  ++lines_;
  index_.try_emplace(record.params_digest, record);
}

std::size_t CacheStore::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

std::size_t CacheStore::compact() {
  std::lock_guard lock(mutex_);
  const std::size_t dropped = lines_ - index_.size();
  if (file_.empty()) {
    lines_ = index_.size();
    return dropped;
  }
  // Keep the original line order of first occurrences.
  std::vector<std::string> kept;
  {
    std::ifstream in(file_, std::ios::binary);
    std::string line;
    std::map<std::string, bool> emitted;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ChatRecord record;
      try {
        record = record_from_json_line(line);
      } catch (const std::exception&) {
        continue;
      }
      if (emitted.emplace(record.params_digest, true).second) kept.push_back(to_json_line(record));
    }
  }
  const auto tmp = std::filesystem::path(file_.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& line : kept) out << line << '\n';
    out.flush();
    if (!out) throw Error("failed to write '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, file_);
  lines_ = index_.size();
  return dropped;
}

}  // namespace affectfuse::llm
