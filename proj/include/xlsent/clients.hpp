#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xlsent {

// Pluggable machine-translation contract. Real backends (e.g. an NLLB
// service) live behind this interface; tests use the identity stub.
class TranslationClient {
 public:
  virtual ~TranslationClient() = default;
  virtual bool supports(const std::string& src, const std::string& tgt) const = 0;
  virtual std::string translate(const std::string& text, const std::string& src,
                                const std::string& tgt) = 0;
};

// Checks the declared capability, then delegates.
std::string translate(TranslationClient& client, const std::string& text, const std::string& src,
                      const std::string& tgt);

// Returns the input unchanged for every declared pair.
class IdentityTranslationClient : public TranslationClient {
 public:
  explicit IdentityTranslationClient(std::set<std::pair<std::string, std::string>> pairs = {});
  bool supports(const std::string& src, const std::string& tgt) const override;
  std::string translate(const std::string& text, const std::string& src, const std::string& tgt) override;

 private:
  std::set<std::pair<std::string, std::string>> pairs_;  // empty set = all pairs
};

// Memoizing wrapper keyed by (text hash, src, tgt); persists as JSONL so
// reruns never hit the backend twice.
class CachingTranslationClient : public TranslationClient {
 public:
  CachingTranslationClient(std::shared_ptr<TranslationClient> inner, std::string cache_path);
  bool supports(const std::string& src, const std::string& tgt) const override;
  std::string translate(const std::string& text, const std::string& src, const std::string& tgt) override;

  std::size_t backend_calls() const { return backend_calls_; }

 private:
  std::shared_ptr<TranslationClient> inner_;
  std::string cache_path_;
  std::map<std::string, std::string> cache_;
  std::size_t backend_calls_ = 0;
};

struct LlmRequest {
  std::string doc_id;
  std::string prompt;
};

// Pluggable completion contract; deterministic stubs keep tests offline.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const LlmRequest& request) = 0;
};

// Always answers the same string.
class FixedResponseLlmClient : public LlmClient {
 public:
  explicit FixedResponseLlmClient(std::string response) : response_(std::move(response)) {}
  std::string complete(const LlmRequest&) override { return response_; }

 private:
  std::string response_;
};

// Reads a doc_id -> response map from JSONL ({"doc_id": ..., "response": ...});
// unknown ids raise an error naming the document.
class FileBackedLlmClient : public LlmClient {
 public:
  explicit FileBackedLlmClient(const std::string& jsonl_path);
  explicit FileBackedLlmClient(std::map<std::string, std::string> responses);
  std::string complete(const LlmRequest& request) override;

 private:
  std::map<std::string, std::string> responses_;
};

}  // namespace xlsent
