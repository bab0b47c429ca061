#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ear/text.h"

namespace ear {

// Raised for malformed input files. Carries the 1-based line when known.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& what, size_t line = 0) : std::runtime_error(what), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

struct Passage {
  std::string id;
  std::string title;
  std::string text;
};

struct QAExample {
  std::string qid;
  std::string question;
  std::vector<std::string> answers;
};

// Immutable collection of passages keyed by id. Normalized body tokens are
// computed once at construction so answer matching never re-tokenizes.
class PassageStore {
 public:
  PassageStore() = default;
  // Throws InputError on a duplicate or empty id.
  explicit PassageStore(std::vector<Passage> passages);

  size_t size() const { return passages_.size(); }
  bool empty() const { return passages_.empty(); }
  std::span<const Passage> passages() const { return passages_; }

  const Passage& at(size_t i) const { return passages_.at(i); }
  std::optional<size_t> find(std::string_view id) const;
  const Passage& get(std::string_view id) const;

  // Normalized body tokens of passage i.
  const std::vector<std::string>& tokens(size_t i) const { return tokens_.at(i); }
  const std::vector<std::string>& tokens(std::string_view id) const;

 private:
  std::vector<Passage> passages_;
  std::vector<std::vector<std::string>> tokens_;
  std::unordered_map<std::string, size_t> by_id_;
};

PassageStore load_corpus(const std::string& path);
// Bare questions (no "answers" field) are accepted only when
// require_answers is false; they load with an empty answer list.
std::vector<QAExample> load_questions(const std::string& path, bool require_answers = true);

void write_corpus(const std::string& path, std::span<const Passage> passages);
void write_questions(const std::string& path, std::span<const QAExample> questions);

// Pre-normalized answer strings for repeated containment checks.
class AnswerMatcher {
 public:
  explicit AnswerMatcher(std::span<const std::string> answers);

  bool matches(const std::vector<std::string>& passage_tokens) const;
  bool matches(const PassageStore& store, std::string_view pid) const {
    return matches(store.tokens(pid));
  }

 private:
  std::vector<std::vector<std::string>> answers_;
};

// True iff the normalized token sequence of some answer occurs contiguously
// in the normalized passage body.
bool contains_answer(const Passage& p, std::span<const std::string> answers);

}  // namespace ear
