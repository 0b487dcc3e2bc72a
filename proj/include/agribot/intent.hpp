#pragma once

// Rule-based intent matching over registered training phrases.
//
// Matching works on whole utterances in three tiers:
//   1. the normalized utterance equals a normalized training phrase -> MATCHED
//   2. the closest phrases by edit distance are within
//      max(2, floor(len(phrase) / 5))                                  -> SUGGEST
//   3. anything else                                                   -> NO_MATCH
// A suggestion is never executed; the caller asks the user to confirm it.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agribot {

enum class IntentHandler { WEATHER_FORECAST, FIELD_STATUS, HELP, CROP_KNOWLEDGE };

std::string_view to_string(IntentHandler handler);
std::optional<IntentHandler> parse_intent_handler(std::string_view name);

struct Intent {
  std::string name;
  IntentHandler handler = IntentHandler::HELP;
  std::vector<std::string> training_phrases;
};

class IntentError : public std::runtime_error {
 public:
  enum class Code { DuplicateIntent, EmptyTrainingPhrase, EmptyUtterance, InvalidRegistry };

  IntentError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

// Lowercases (simple case folding), turns punctuation and control characters
// into separators and splits on whitespace.
std::vector<std::string> normalize(std::string_view text);

// normalize() joined with single spaces.
std::string normalize_joined(std::string_view text);

// Unit-cost insert/delete/substitute distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Largest edit distance at which a phrase of `phrase_len` code points is suggested.
constexpr std::size_t suggestion_threshold(std::size_t phrase_len) {
  return phrase_len / 5 > 2 ? phrase_len / 5 : 2;
}

inline constexpr std::size_t kMaxSuggestions = 3;

class IntentRegistry {
 public:
  // Throws DuplicateIntent or EmptyTrainingPhrase; the registry is unchanged on error.
  void add(Intent intent);

  const std::vector<Intent>& intents() const noexcept { return intents_; }
  std::size_t size() const noexcept { return intents_.size(); }
  bool empty() const noexcept { return intents_.empty(); }
  const Intent* find(std::string_view name) const;

  struct Phrase {
    std::size_t intent_index;
    std::string text;
    std::u32string normalized;
  };
  // Every training phrase in registry order, normalized once at registration.
  const std::vector<Phrase>& phrases() const noexcept { return phrases_; }

 private:
  std::vector<Intent> intents_;
  std::vector<Phrase> phrases_;
};

IntentRegistry register_intent(IntentRegistry registry, Intent intent);

// Registry file: [{"name":S,"handler":S,"phrases":[S...]}...]
IntentRegistry parse_registry(std::string_view json_text);
IntentRegistry load_registry(const std::filesystem::path& path);

enum class MatchOutcome { MATCHED, SUGGEST, NO_MATCH };

struct Suggestion {
  std::string phrase;
  std::string intent;
  std::size_t distance = 0;
  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

struct MatchResult {
  MatchOutcome outcome = MatchOutcome::NO_MATCH;
  std::string intent;                   // MATCHED only
  std::vector<Suggestion> suggestions;  // SUGGEST only, nearest first, 1..3 entries
  std::size_t distance = 0;             // SUGGEST only: distance of the nearest phrase

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

// Throws IntentError(EmptyUtterance) when the text normalizes to nothing.
MatchResult match_intent(std::string_view text, const IntentRegistry& registry);

}  // namespace agribot
