#include "agribot/intent.hpp"

#include <algorithm>
#include <clocale>
#include <cwctype>
#include <locale.h>
#include <numeric>
#include <set>

#include <json.hpp>

#include "file_util.hpp"
#include "utf8.hpp"

namespace agribot {

namespace {

using Json = nlohmann::json;

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

bool is_separator(char32_t c) {
  if (c < 0x20 || c == 0x7F) return true;
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0xA1 && c <= 0xBF) {
    // Keep the ordinal indicators, superscript digits, micro sign and fractions.
    switch (c) {
      case 0xAA: case 0xB2: case 0xB3: case 0xB5: case 0xB9:
      case 0xBA: case 0xBC: case 0xBD: case 0xBE:
        return false;
      default:
        return true;
    }
  }
  return c == 0xD7 || c == 0xF7 ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         c == 0x0E4F || c == 0x0E5A || c == 0x0E5B ||  // Thai fongman, angkhankhu, khomut
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20);
}

locale_t utf8_locale() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(0));
    if (l == static_cast<locale_t>(0)) {
      l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(0));
    }
    return l;
  }();
  return loc;
}

char32_t fold(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  const locale_t loc = utf8_locale();
  if (loc == static_cast<locale_t>(0)) return c;
  return static_cast<char32_t>(towlower_l(static_cast<wint_t>(c), loc));
}

std::vector<std::u32string> normalize_u32(std::string_view text) {
  std::vector<std::u32string> tokens;
  std::u32string current;
  for (char32_t c : utf8::decode(text)) {
    if (is_space(c) || is_separator(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(fold(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::u32string join(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(U' ');
    out += t;
  }
  return out;
}

}  // namespace

std::string_view to_string(IntentHandler handler) {
  switch (handler) {
    case IntentHandler::WEATHER_FORECAST: return "WEATHER_FORECAST";
    case IntentHandler::FIELD_STATUS: return "FIELD_STATUS";
    case IntentHandler::HELP: return "HELP";
    case IntentHandler::CROP_KNOWLEDGE: return "CROP_KNOWLEDGE";
  }
  return "?";
}

std::optional<IntentHandler> parse_intent_handler(std::string_view name) {
  for (auto h : {IntentHandler::WEATHER_FORECAST, IntentHandler::FIELD_STATUS,
                 IntentHandler::HELP, IntentHandler::CROP_KNOWLEDGE}) {
    if (to_string(h) == name) return h;
  }
  return std::nullopt;
}

std::vector<std::string> normalize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& token : normalize_u32(text)) out.push_back(utf8::encode(token));
  return out;
}

std::string normalize_joined(std::string_view text) {
  return utf8::encode(join(normalize_u32(text)));
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(utf8::decode(a), utf8::decode(b));
}

void IntentRegistry::add(Intent intent) {
  if (intent.name.empty()) {
    throw IntentError(IntentError::Code::InvalidRegistry, "intent name is empty");
  }
  if (find(intent.name) != nullptr) {
    throw IntentError(IntentError::Code::DuplicateIntent, "duplicate intent '" + intent.name + "'");
  }
  if (intent.training_phrases.empty()) {
    throw IntentError(IntentError::Code::EmptyTrainingPhrase,
                      "intent '" + intent.name + "' has no training phrases");
  }
  std::vector<Phrase> added;
  for (const auto& phrase : intent.training_phrases) {
    auto normalized = join(normalize_u32(phrase));
    if (normalized.empty()) {
      throw IntentError(IntentError::Code::EmptyTrainingPhrase,
                        "intent '" + intent.name + "': phrase '" + phrase +
                            "' normalizes to nothing");
    }
    added.push_back({intents_.size(), phrase, std::move(normalized)});
  }
  intents_.push_back(std::move(intent));
  phrases_.insert(phrases_.end(), std::make_move_iterator(added.begin()),
                  std::make_move_iterator(added.end()));
}

const Intent* IntentRegistry::find(std::string_view name) const {
  for (const auto& intent : intents_) {
    if (intent.name == name) return &intent;
  }
  return nullptr;
}

IntentRegistry register_intent(IntentRegistry registry, Intent intent) {
  registry.add(std::move(intent));
  return registry;
}

IntentRegistry parse_registry(std::string_view json_text) {
  auto invalid = [](const std::string& msg) {
    return IntentError(IntentError::Code::InvalidRegistry, msg);
  };
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw invalid(std::string("registry parse error: ") + e.what());
  }
  if (!doc.is_array()) throw invalid("registry must be a JSON array");

  IntentRegistry registry;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& rec = doc[i];
    const std::string where = "registry record " + std::to_string(i);
    if (!rec.is_object()) throw invalid(where + ": expected an object");
    if (!rec.contains("name") || !rec["name"].is_string()) throw invalid(where + ": bad 'name'");
    if (!rec.contains("handler") || !rec["handler"].is_string()) {
      throw invalid(where + ": bad 'handler'");
    }
    if (!rec.contains("phrases") || !rec["phrases"].is_array()) {
      throw invalid(where + ": bad 'phrases'");
    }
    Intent intent;
    intent.name = rec["name"].get<std::string>();
    const auto handler = parse_intent_handler(rec["handler"].get<std::string>());
    if (!handler) throw invalid(where + ": unknown handler '" + rec["handler"].get<std::string>() + "'");
    intent.handler = *handler;
    for (const Json& p : rec["phrases"]) {
      if (!p.is_string()) throw invalid(where + ": phrases must be strings");
      intent.training_phrases.push_back(p.get<std::string>());
    }
    registry.add(std::move(intent));
  }
  return registry;
}

IntentRegistry load_registry(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_text_file(path);
  } catch (const std::exception& e) {
    throw IntentError(IntentError::Code::InvalidRegistry, e.what());
  }
  return parse_registry(text);
}

MatchResult match_intent(std::string_view text, const IntentRegistry& registry) {
  if (registry.empty()) {
    throw IntentError(IntentError::Code::InvalidRegistry, "intent registry is empty");
  }
  const std::u32string utterance = join(normalize_u32(text));
  if (utterance.empty()) {
    throw IntentError(IntentError::Code::EmptyUtterance, "utterance is empty after normalization");
  }

  const auto& phrases = registry.phrases();
  for (const auto& p : phrases) {
    if (p.normalized == utterance) {
      MatchResult r;
      r.outcome = MatchOutcome::MATCHED;
      r.intent = registry.intents()[p.intent_index].name;
      return r;
    }
  }

  struct Candidate {
    std::size_t distance;
    std::size_t order;
    const IntentRegistry::Phrase* phrase;
  };
  std::vector<Candidate> candidates;
  std::set<std::u32string> seen;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    const auto& p = phrases[i];
    if (!seen.insert(p.normalized).second) continue;
    const std::size_t d = levenshtein(utterance, p.normalized);
    if (d <= suggestion_threshold(p.normalized.size())) candidates.push_back({d, i, &p});
  }
  if (candidates.empty()) return MatchResult{};

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.order != b.order) return a.order < b.order;
    return a.phrase->text < b.phrase->text;
  });
  if (candidates.size() > kMaxSuggestions) candidates.resize(kMaxSuggestions);

  MatchResult r;
  r.outcome = MatchOutcome::SUGGEST;
  r.distance = candidates.front().distance;
  for (const auto& c : candidates) {
    r.suggestions.push_back(
        {c.phrase->text, registry.intents()[c.phrase->intent_index].name, c.distance});
  }
  return r;
}

}  // namespace agribot
