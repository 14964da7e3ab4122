#include "deckeval/filter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "deckeval/errors.hpp"
#include "deckeval/prompts.hpp"
#include "deckeval/text.hpp"

namespace deckeval {

namespace {

// Relative a-z letter frequencies of English text, in percent.
constexpr double kEnglishLetters[26] = {8.167, 1.492, 2.782, 4.253, 12.702, 2.228, 2.015, 6.094, 6.966,
                                        0.153, 0.772, 4.025, 2.406, 6.749,  7.507, 1.929, 0.095, 5.987,
                                        6.327, 9.056, 2.758, 0.978, 2.360, 0.150,  1.974, 0.074};

// Frozen after measuring the labeled calibration decks in the test suite.
constexpr std::size_t kMinLetters = 40;
constexpr double kMaxNonAsciiEnglish = 0.02;
constexpr double kMinNonAsciiForeign = 0.05;
constexpr double kEnglishCosine = 0.90;
constexpr double kForeignCosine = 0.85;
constexpr double kEnglishThRate = 0.03;
constexpr double kForeignThRate = 0.02;

const char* const kIntroStems[] = {"title", "agenda", "introduc", "overview"};
const char* const kConclusionStems[] = {"conclu", "summary", "thank", "question", "reference"};

std::set<std::string> token_set(const Slide& s) {
  auto tokens = text::normalized_tokens(slide_plain_text(s));
  return {tokens.begin(), tokens.end()};
}

bool has_cue(const Slide& s, const char* const* stems, std::size_t count) {
  for (const auto& tok : text::normalized_tokens(slide_plain_text(s))) {
    for (std::size_t i = 0; i < count; ++i) {
      if (text::starts_with_ci(tok, stems[i])) return true;
    }
  }
  return false;
}

std::string deck_text(const Presentation& p) {
  std::string out;
  for (const auto& s : p.slides) {
    if (!out.empty()) out.push_back('\n');
    out += slide_plain_text(s);
  }
  return out;
}

bool is_english_tag(std::string_view tag) {
  auto t = text::to_lower(text::trim(tag));
  return t == "en" || t == "english" || t.rfind("en-", 0) == 0 || t.rfind("en_", 0) == 0;
}

std::optional<bool> yes_no(std::string_view reply) {
  auto words = text::normalized_tokens(reply);
  if (words.empty()) return std::nullopt;
  if (words.front() == "yes") return true;
  if (words.front() == "no") return false;
  return std::nullopt;
}

RuleFailure fail(RuleKind rule, std::string detail) { return RuleFailure{rule, std::move(detail)}; }

}  // namespace

std::string_view rule_name(RuleKind rule) {
  switch (rule) {
    case RuleKind::Length: return "length";
    case RuleKind::IntroConclusion: return "intro_conclusion";
    case RuleKind::Overlap: return "overlap";
    case RuleKind::Language: return "language";
    case RuleKind::AspectRatio: return "aspect_ratio";
  }
  return "unknown";
}

std::optional<RuleFailure> check_length(const Presentation& p, const FilterOptions& opts) {
  const auto m = static_cast<int>(p.slides.size());
  if (m >= opts.min_slides && m <= opts.max_slides) return std::nullopt;
  return fail(RuleKind::Length, std::to_string(m) + " slides, allowed " + std::to_string(opts.min_slides) + ".." +
                                    std::to_string(opts.max_slides));
}

double slide_overlap(const Slide& a, const Slide& b) {
  auto sa = token_set(a);
  auto sb = token_set(b);
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  if (uni == 0) return 1.0;  // two empty slides are the same slide
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<RuleFailure> check_overlap(const Presentation& p, const FilterOptions& opts) {
  for (std::size_t i = 1; i < p.slides.size(); ++i) {
    auto sa = token_set(p.slides[i - 1]);
    auto sb = token_set(p.slides[i]);
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    // compared on counts so that exactly 8 of 10 is not "above" 0.8
    const double excess = static_cast<double>(inter) - opts.overlap_threshold * static_cast<double>(uni);
    if (uni == 0 || excess > 1e-9 * static_cast<double>(uni)) {
      const double j = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
      return fail(RuleKind::Overlap, "slides " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                         " overlap " + std::to_string(j));
    }
  }
  return std::nullopt;
}

std::optional<RuleFailure> check_aspect_ratio(const Presentation& p, const FilterOptions& opts) {
  const auto& ar = p.aspect_ratio;
  if (ar.width <= 0 || ar.height <= 0) {
    throw MalformedInputError("aspect ratio " + std::to_string(ar.width) + ":" + std::to_string(ar.height) +
                              " has a non-positive side");
  }
  const double target = 16.0 / 9.0;
  const double ratio = static_cast<double>(ar.width) / static_cast<double>(ar.height);
  if (std::abs(ratio - target) <= opts.aspect_tolerance * target) return std::nullopt;
  return fail(RuleKind::AspectRatio,
              std::to_string(ar.width) + ":" + std::to_string(ar.height) + " is not 16:9 (ratio " +
                  std::to_string(ratio) + ")");
}

LanguageStats language_stats(std::string_view s) {
  LanguageStats out;
  double counts[26] = {};
  std::size_t ascii_letters = 0;
  std::size_t non_ascii = 0;
  std::size_t bigrams = 0;
  char prev = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto u = static_cast<unsigned char>(s[i]);
    if (u >= 0x80) {
      // count code points by their lead byte; continuation bytes are skipped
      if ((u & 0xC0) != 0x80) ++non_ascii;
      prev = 0;
      continue;
    }
    if (!std::isalpha(u)) {
      prev = 0;
      continue;
    }
    const char c = static_cast<char>(std::tolower(u));
    ++ascii_letters;
    counts[c - 'a'] += 1;
    if (c == 'h' && (prev == 't' || prev == 'w' || prev == 's')) ++bigrams;
    prev = c;
  }
  out.letters = ascii_letters + non_ascii;
  if (out.letters == 0) return out;
  out.non_ascii_share = static_cast<double>(non_ascii) / static_cast<double>(out.letters);
  if (ascii_letters == 0) return out;
  double dot = 0, nc = 0, ne = 0;
  for (int i = 0; i < 26; ++i) {
    dot += counts[i] * kEnglishLetters[i];
    nc += counts[i] * counts[i];
    ne += kEnglishLetters[i] * kEnglishLetters[i];
  }
  out.english_cosine = dot / std::sqrt(nc * ne);
  out.th_rate = static_cast<double>(bigrams) / static_cast<double>(ascii_letters);
  return out;
}

LanguageGuess guess_language(std::string_view s) {
  const auto st = language_stats(s);
  if (st.letters < kMinLetters) return LanguageGuess::Inconclusive;
  if (st.non_ascii_share > kMinNonAsciiForeign) return LanguageGuess::NotEnglish;
  if (st.english_cosine < kForeignCosine || st.th_rate < kForeignThRate) return LanguageGuess::NotEnglish;
  if (st.english_cosine >= kEnglishCosine && st.th_rate >= kEnglishThRate &&
      st.non_ascii_share <= kMaxNonAsciiEnglish) {
    return LanguageGuess::English;
  }
  return LanguageGuess::Inconclusive;
}

std::optional<RuleFailure> check_language(const Presentation& p, const FilterOptions& opts) {
  if (!text::trim(p.language_tag).empty()) {
    if (is_english_tag(p.language_tag)) return std::nullopt;
    return fail(RuleKind::Language, "tagged '" + p.language_tag + "'");
  }
  const auto body = deck_text(p);
  switch (guess_language(body)) {
    case LanguageGuess::English: return std::nullopt;
    case LanguageGuess::NotEnglish: return fail(RuleKind::Language, "untagged, text classified as non-English");
    case LanguageGuess::Inconclusive: break;
  }
  if (opts.gateway) {
    GatewayRequest req;
    req.model_id = opts.model_id;
    req.prompt = prompts::language_prompt(body);
    req.max_tokens = 4;
    auto answer = yes_no(opts.gateway->complete(req));
    if (answer == true) return std::nullopt;
    if (answer == false) return fail(RuleKind::Language, "untagged, model judged non-English");
    return fail(RuleKind::Language, "untagged, unreadable model judgment");
  }
  return fail(RuleKind::Language, "untagged, language inconclusive");
}

std::optional<RuleFailure> check_intro_conclusion(const Presentation& p, const FilterOptions& opts) {
  const std::size_t m = p.slides.size();
  if (m == 0) return fail(RuleKind::IntroConclusion, "empty deck");

  if (opts.gateway && opts.model_intro_conclusion) {
    bool intro = false;
    bool conclusion = false;
    for (std::size_t start = 0; start < m; start += 5) {
      std::vector<Slide> batch(p.slides.begin() + static_cast<std::ptrdiff_t>(start),
                               p.slides.begin() + static_cast<std::ptrdiff_t>(std::min(m, start + 5)));
      GatewayRequest req;
      req.model_id = opts.model_id;
      req.prompt = prompts::intro_conclusion_prompt(batch, start);
      req.max_tokens = 32;
      const auto raw = opts.gateway->complete(req);
      auto open = raw.find('{');
      auto close = raw.rfind('}');
      nlohmann::json j = nlohmann::json::parse(
          open == std::string::npos || close == std::string::npos ? std::string() : raw.substr(open, close - open + 1),
          nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        return fail(RuleKind::IntroConclusion, "unreadable model judgment for slides " + std::to_string(start + 1));
      }
      intro = intro || j.value("intro", false);
      conclusion = conclusion || j.value("conclusion", false);
    }
    if (intro && conclusion) return std::nullopt;
    return fail(RuleKind::IntroConclusion, std::string("model found no ") + (intro ? "concluding" : "introductory") +
                                               " slide");
  }

  const std::size_t window = std::min<std::size_t>(2, m);
  bool intro = false;
  bool conclusion = false;
  for (std::size_t i = 0; i < window; ++i) {
    intro = intro || has_cue(p.slides[i], kIntroStems, std::size(kIntroStems));
    conclusion = conclusion || has_cue(p.slides[m - 1 - i], kConclusionStems, std::size(kConclusionStems));
  }
  if (intro && conclusion) return std::nullopt;
  if (!intro && !conclusion) return fail(RuleKind::IntroConclusion, "no introductory or concluding slide");
  return fail(RuleKind::IntroConclusion, intro ? "no concluding slide" : "no introductory slide");
}

FilterVerdict evaluate_deck(const Presentation& p, const FilterOptions& opts) {
  FilterVerdict v;
  v.presentation_id = p.id;
  using Check = std::optional<RuleFailure> (*)(const Presentation&, const FilterOptions&);
  const std::pair<RuleKind, Check> checks[] = {
      {RuleKind::Length, check_length},     {RuleKind::IntroConclusion, check_intro_conclusion},
      {RuleKind::Overlap, check_overlap},   {RuleKind::Language, check_language},
      {RuleKind::AspectRatio, check_aspect_ratio},
  };
  for (const auto& [rule, check] : checks) {
    try {
      if (auto f = check(p, opts)) v.failures.push_back(std::move(*f));
    } catch (const TransportError&) {
      throw;
    } catch (const Error& e) {
      v.failures.push_back(fail(rule, std::string("malformed input: ") + e.what()));
    }
  }
  return v;
}

FilterResult filter_corpus(const std::vector<Presentation>& corpus, const FilterOptions& opts) {
  FilterResult out;
  for (const auto& p : corpus) {
    auto v = evaluate_deck(p, opts);
    if (v.passed()) {
      out.kept.push_back(p);
      ++out.report.kept;
    }
    for (const auto& f : v.failures) {
      const auto idx = static_cast<std::size_t>(std::find(kAllRules.begin(), kAllRules.end(), f.rule) - kAllRules.begin());
      ++out.report.rejections[idx];
    }
    out.report.verdicts.push_back(std::move(v));
  }
  std::stable_sort(out.report.verdicts.begin(), out.report.verdicts.end(),
                   [](const FilterVerdict& a, const FilterVerdict& b) { return a.presentation_id < b.presentation_id; });
  return out;
}

nlohmann::json filter_report_to_json(const FilterReport& report) {
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t i = 0; i < kAllRules.size(); ++i) counts[std::string(rule_name(kAllRules[i]))] = report.rejections[i];
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : report.verdicts) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : v.failures) failures.push_back({{"rule", rule_name(f.rule)}, {"detail", f.detail}});
    verdicts.push_back({{"id", v.presentation_id}, {"passed", v.passed()}, {"failures", failures}});
  }
  return {{"kept", report.kept}, {"total", report.verdicts.size()}, {"rejections", counts}, {"verdicts", verdicts}};
}

}  // namespace deckeval
