#include "xlsent/clients.hpp"

#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "xlsent/errors.hpp"

namespace xlsent {

using nlohmann::json;

std::string translate(TranslationClient& client, const std::string& text, const std::string& src,
                      const std::string& tgt) {
  if (!client.supports(src, tgt)) {
    throw DataError("translation client does not support pair " + src + " -> " + tgt);
  }
  return client.translate(text, src, tgt);
}

IdentityTranslationClient::IdentityTranslationClient(std::set<std::pair<std::string, std::string>> pairs)
    : pairs_(std::move(pairs)) {}

bool IdentityTranslationClient::supports(const std::string& src, const std::string& tgt) const {
  return pairs_.empty() || pairs_.count({src, tgt}) > 0;
}

std::string IdentityTranslationClient::translate(const std::string& text, const std::string& src,
                                                 const std::string& tgt) {
  if (!supports(src, tgt)) throw DataError("unsupported translation pair " + src + " -> " + tgt);
  return text;
}

namespace {

// FNV-1a; good enough to key a translation cache
std::string text_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

CachingTranslationClient::CachingTranslationClient(std::shared_ptr<TranslationClient> inner,
                                                   std::string cache_path)
    : inner_(std::move(inner)), cache_path_(std::move(cache_path)) {
  std::ifstream in(cache_path_);
  if (!in) return;  // cache starts empty
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const std::string key = rec.at("key").get<std::string>() + '|' + rec.at("src").get<std::string>() +
                              '|' + rec.at("tgt").get<std::string>();
      cache_[key] = rec.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError("translation cache line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

bool CachingTranslationClient::supports(const std::string& src, const std::string& tgt) const {
  return inner_->supports(src, tgt);
}

std::string CachingTranslationClient::translate(const std::string& text, const std::string& src,
                                                const std::string& tgt) {
  const std::string hash = text_hash(text);
  const std::string key = hash + '|' + src + '|' + tgt;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const std::string result = inner_->translate(text, src, tgt);
  ++backend_calls_;
  cache_[key] = result;
  if (!cache_path_.empty()) {
    std::ofstream out(cache_path_, std::ios::app | std::ios::binary);
    if (out) {
      json rec;
      rec["key"] = hash;
      rec["src"] = src;
      rec["tgt"] = tgt;
      rec["text"] = result;
      out << rec.dump() << '\n';
    }
  }
  return result;
}

FileBackedLlmClient::FileBackedLlmClient(const std::string& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw DataError("cannot open LLM stub file \"" + jsonl_path + "\"");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      responses_[rec.at("doc_id").get<std::string>()] = rec.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError("LLM stub file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

FileBackedLlmClient::FileBackedLlmClient(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

std::string FileBackedLlmClient::complete(const LlmRequest& request) {
  auto it = responses_.find(request.doc_id);
  if (it == responses_.end()) {
    throw DataError("LLM stub has no response for document \"" + request.doc_id + "\"");
  }
  return it->second;
}

}  // namespace xlsent
