#include "travnav/instruction.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "travnav/prompt_template_data.hpp"

namespace travnav {

namespace {

struct Token {
  std::string text;
  bool is_word = false;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      tokens.push_back({word, true});
      word.clear();
    }
  };
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      flush();
    } else {
      flush();
      tokens.push_back({std::string(1, raw), false});
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> words_of(std::string_view phrase) {
  std::vector<std::string> out;
  for (auto& t : tokenize(phrase)) {
    if (t.is_word) out.push_back(std::move(t.text));
  }
  return out;
}

bool contains(std::initializer_list<std::string_view> set, const std::string& w) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

// Words that end a governed noun phrase.
bool is_phrase_break(const std::string& w) {
  return contains({"and", "but", "or", "then", "nor", "yet", "so", "while", "before", "after", "until",
                   "when", "in", "on", "at", "of", "to", "for", "with", "by", "from", "into", "onto",
                   "near", "behind", "beside", "between", "under", "over", "across", "along", "around",
                   "toward", "towards", "next", "past", "inside", "outside", "beyond", "through", "please",
                   "carefully", "slowly", "quickly", "too", "again", "first", "now", "there", "here",
                   "which", "that", "who", "where"},
                  w);
}

bool is_determiner(const std::string& w) {
  return contains({"the", "a", "an", "this", "these", "those", "my", "your", "its", "their", "our", "some",
                   "any", "all"},
                  w);
}

std::string singular(std::string w) {
  auto ends_with = [&](std::string_view suf) {
    return w.size() > suf.size() + 1 && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with("ies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (ends_with("ches") || ends_with("shes") || ends_with("xes") || ends_with("sses")) {
    w.erase(w.size() - 2);
  } else if (ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    w.pop_back();
  }
  return w;
}

struct Phrase {
  std::vector<std::string> words;
  Attribute attribute;
  std::string text;
};

std::vector<Phrase> compile(const VerbLexicon& lexicon) {
  std::vector<Phrase> phrases;
  for (const auto& p : lexicon.traversal) phrases.push_back({words_of(p), Attribute::Traversable, p});
  for (const auto& p : lexicon.avoidance) phrases.push_back({words_of(p), Attribute::Untraversable, p});
  std::erase_if(phrases, [](const Phrase& p) { return p.words.empty(); });
  // Longest first; on equal length avoidance precedes traversal.
  std::stable_sort(phrases.begin(), phrases.end(), [](const Phrase& a, const Phrase& b) {
    if (a.words.size() != b.words.size()) return a.words.size() > b.words.size();
    return a.attribute < b.attribute;
  });
  return phrases;
}

const Phrase* match_at(const std::vector<Phrase>& phrases, const std::vector<Token>& tokens, std::size_t i) {
  for (const auto& p : phrases) {
    if (i + p.words.size() > tokens.size()) continue;
    bool ok = true;
    for (std::size_t k = 0; k < p.words.size() && ok; ++k) {
      ok = tokens[i + k].is_word && tokens[i + k].text == p.words[k];
    }
    if (ok) return &p;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void VerbLexicon::validate() const {
  auto has_phrase = [](const std::vector<std::string>& list) {
    return std::any_of(list.begin(), list.end(), [](const std::string& p) { return !words_of(p).empty(); });
  };
  if (!has_phrase(traversal) || !has_phrase(avoidance)) {
    throw std::invalid_argument("lexicon needs at least one traversal and one avoidance phrase");
  }
}

VerbLexicon VerbLexicon::defaults() {
  return {{"go through", "pass through", "walk through", "walk across", "traverse", "cross"},
          {"watch out", "watch out for", "be careful of", "avoid", "mind", "steer clear of", "stay away from"}};
}

VerbLexicon VerbLexicon::from_json_text(const std::string& text) {
  VerbLexicon lex;
  try {
    const auto j = nlohmann::json::parse(text);
    lex.traversal = j.at("traversal").get<std::vector<std::string>>();
    lex.avoidance = j.at("avoidance").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("lexicon: ") + e.what());
  }
  lex.validate();
  return lex;
}

VerbLexicon VerbLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::vector<LandmarkDirective> merge_directives(std::vector<LandmarkDirective> directives) {
  std::vector<LandmarkDirective> merged;
  std::unordered_map<std::string, std::size_t> slot;
  for (auto& d : directives) {
    auto it = slot.find(d.label);
    if (it == slot.end()) {
      slot.emplace(d.label, merged.size());
      merged.push_back(std::move(d));
    } else if (d.attribute == Attribute::Untraversable && merged[it->second].attribute == Attribute::Traversable) {
      merged[it->second].attribute = Attribute::Untraversable;
      merged[it->second].source_action = std::move(d.source_action);
    }
  }
  return merged;
}

std::vector<LandmarkDirective> parse_instruction(std::string_view text, const VerbLexicon& lexicon) {
  lexicon.validate();
  const auto phrases = compile(lexicon);
  const auto tokens = tokenize(text);

  std::vector<LandmarkDirective> found;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const Phrase* verb = match_at(phrases, tokens, i);
    if (verb == nullptr) {
      ++i;
      continue;
    }
    std::size_t j = i + verb->words.size();
    std::string head;
    while (j < tokens.size() && tokens[j].is_word && !is_phrase_break(tokens[j].text) &&
           match_at(phrases, tokens, j) == nullptr) {
      if (!is_determiner(tokens[j].text)) head = tokens[j].text;
      ++j;
    }
    if (!head.empty()) {
      found.push_back({singular(head), verb->attribute, verb->text});
    }
    i = j;
  }
  return merge_directives(std::move(found));
}

std::string_view extraction_prompt_template() { return detail::kPromptTemplate; }

std::string build_extraction_prompt(std::string_view instruction) {
  std::string prompt(extraction_prompt_template());
  const std::string key = "{instruction}";
  const auto pos = prompt.find(key);
  if (pos != std::string::npos) prompt.replace(pos, key.size(), trim(instruction));
  return prompt;
}

std::vector<LandmarkDirective> parse_model_response(std::string_view response) {
  const std::string raw(response);
  if (trim(raw).empty()) throw RemoteExtractionError("empty model response", raw);

  static const std::regex item_re(R"re(^["'`]?\s*([^"'`]+?)\s*["'`]?\s+and\s+["'`]?\s*([^"'`\s]+?)\s*["'`]?$)re",
                                  std::regex::icase);
  std::vector<LandmarkDirective> out;
  std::string item;
  std::stringstream ss(raw);
  while (std::getline(ss, item, ';')) {
    std::stringstream lines(item);
    std::string line;
    while (std::getline(lines, line)) {
      line = trim(line);
      while (!line.empty() && (line.back() == '.' || line.back() == ',')) line.pop_back();
      line = trim(line);
      if (line.empty()) continue;
      std::smatch m;
      if (!std::regex_match(line, m, item_re)) {
        throw RemoteExtractionError("malformed model response item: " + line, raw);
      }
      const std::string token = m[2].str();
      if (token != "0" && token != "1") {
        throw RemoteExtractionError("attribute token outside {0,1}: " + token, raw);
      }
      out.push_back({lower(trim(m[1].str())), token == "1" ? Attribute::Traversable : Attribute::Untraversable,
                     "model"});
    }
  }
  if (out.empty()) throw RemoteExtractionError("model response holds no directives", raw);
  return merge_directives(std::move(out));
}

std::vector<LandmarkDirective> remote_extract(std::string_view instruction, ModelClient& client) {
  return parse_model_response(client.complete(build_extraction_prompt(instruction)));
}

}  // namespace travnav
