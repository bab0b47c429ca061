#include "ear/text.h"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <stdexcept>

namespace ear {

namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::vector<std::string> split_ascii(std::string_view s, bool lower) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (ascii_alnum(c)) {
      cur.push_back(lower ? ascii_lower(c) : c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_unicode(const icu::UnicodeString& text) {
  std::vector<std::string> out;
  std::string cur;
  for (int32_t i = 0; i < text.length();) {
    UChar32 cp = text.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isalnum(cp)) {
      icu::UnicodeString(cp).toUTF8String(cur);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

const icu::Normalizer2& nfkc_casefold() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC_Casefold unavailable");
  return *n;
}

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC unavailable");
  return *n;
}

icu::UnicodeString apply(const icu::Normalizer2& n, std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  icu::UnicodeString dst = n.normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("unicode normalization failed");
  return dst;
}

constexpr std::array<std::string_view, 33> kStopwords = {
    "a",    "an",    "and",  "are",   "as",    "at",   "be",   "but",  "by",
    "for",  "if",    "in",   "into",  "is",    "it",   "no",   "not",  "of",
    "on",   "or",    "such", "that",  "the",   "their", "then", "there", "these",
    "they", "this",  "to",   "was",   "will",  "with"};

}  // namespace

std::string NormalizedText::joined() const {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

NormalizedText normalize(std::string_view raw) {
  if (is_ascii(raw)) return {split_ascii(raw, true)};
  return {split_unicode(apply(nfkc_casefold(), raw))};
}

std::vector<std::string> tokenize_raw(std::string_view raw) {
  if (is_ascii(raw)) return split_ascii(raw, false);
  return split_unicode(apply(nfkc(), raw));
}

bool is_numeric_token(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool starts_uppercase(std::string_view raw_token) {
  if (raw_token.empty()) return false;
  UChar32 cp;
  int32_t i = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(raw_token.data()), i,
          static_cast<int32_t>(raw_token.size()), cp);
  return cp >= 0 && u_isupper(cp);
}

bool is_stopword(std::string_view token) {
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> analyze_tokens(const std::vector<std::string>& normalized,
                                        const AnalyzerOptions& opts) {
  std::vector<std::string> out;
  out.reserve(normalized.size());
  for (const auto& tok : normalized) {
    if (opts.stopwords && is_stopword(tok)) continue;
    out.push_back(opts.stemming ? porter_stem(tok) : tok);
  }
  return out;
}

std::vector<std::string> analyze(std::string_view raw, const AnalyzerOptions& opts) {
  return analyze_tokens(normalize(raw).tokens, opts);
}

}  // namespace ear
