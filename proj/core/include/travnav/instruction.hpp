#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace travnav {

/// Action-aware attribute of a landmark: may the robot traverse it?
enum class Attribute : std::uint8_t { Untraversable = 0, Traversable = 1 };

inline int to_int(Attribute a) { return static_cast<int>(a); }

struct LandmarkDirective {
  std::string label;          // lowercase head noun, e.g. "curtain"
  Attribute attribute = Attribute::Untraversable;
  std::string source_action;  // verb phrase that produced the attribute

  friend bool operator==(const LandmarkDirective&, const LandmarkDirective&) = default;
};

/// Verb phrases that govern the attribute of the noun phrase following them.
struct VerbLexicon {
  std::vector<std::string> traversal;
  std::vector<std::string> avoidance;

  /// Throws std::invalid_argument unless both lists hold at least one phrase.
  void validate() const;

  static VerbLexicon defaults();
  static VerbLexicon from_json_text(const std::string& text);
  static VerbLexicon load(const std::string& path);
};

/// Deterministic rule-based extraction. Each verb phrase governs the noun
/// phrase after it, up to punctuation, a conjunction or a preposition; the
/// label is that phrase's head noun with articles removed. A label reached by
/// both traversal and avoidance phrases comes out untraversable. Directives
/// are ordered by first mention.
std::vector<LandmarkDirective> parse_instruction(std::string_view text, const VerbLexicon& lexicon);

/// Collapses duplicate labels, keeping first-mention order; attribute 0 wins.
std::vector<LandmarkDirective> merge_directives(std::vector<LandmarkDirective> directives);

// --- remote large-model extraction ------------------------------------------

class RemoteExtractionError : public std::runtime_error {
 public:
  RemoteExtractionError(const std::string& what, std::string raw_response)
      : std::runtime_error(what), raw_response_(std::move(raw_response)) {}
  const std::string& raw_response() const { return raw_response_; }

 private:
  std::string raw_response_;
};

/// Text-completion backend. Implementations block; never call from the tick thread.
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  /// Returns the model's reply text. Throws RemoteExtractionError on transport failure.
  virtual std::string complete(const std::string& prompt) = 0;
};

/// OpenAI-style chat-completions client. Endpoint and key come from
/// MODEL_ENDPOINT and MODEL_API_KEY unless given explicitly.
class HttpModelClient : public ModelClient {
 public:
  HttpModelClient(std::string endpoint, std::string api_key, std::string model = "gpt-3.5-turbo");
  static std::unique_ptr<HttpModelClient> from_environment();

  std::string complete(const std::string& prompt) override;

 private:
  std::string endpoint_;
  std::string api_key_;
  std::string model_;
};

/// The stored template with {instruction} filled in.
std::string build_extraction_prompt(std::string_view instruction);
std::string_view extraction_prompt_template();

/// Parses replies shaped like `curtain and 1; chair and 0` (quotes optional).
/// Throws RemoteExtractionError carrying the raw text on malformed input.
std::vector<LandmarkDirective> parse_model_response(std::string_view response);

std::vector<LandmarkDirective> remote_extract(std::string_view instruction, ModelClient& client);

}  // namespace travnav
