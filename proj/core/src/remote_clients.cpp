#include <cstdlib>

#include "travnav/grounding.hpp"
#include "travnav/instruction.hpp"

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

namespace travnav {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v == nullptr ? std::string{} : std::string{v};
}

httplib::Headers auth_headers(const std::string& key) {
  httplib::Headers h;
  if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
  return h;
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// --- model client ------------------------------------------------------------

HttpModelClient::HttpModelClient(std::string endpoint, std::string api_key, std::string model)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::unique_ptr<HttpModelClient> HttpModelClient::from_environment() {
  auto endpoint = env_or_empty("MODEL_ENDPOINT");
  if (endpoint.empty()) throw std::runtime_error("MODEL_ENDPOINT is not set");
  return std::make_unique<HttpModelClient>(std::move(endpoint), env_or_empty("MODEL_API_KEY"));
}

std::string HttpModelClient::complete(const std::string& prompt) {
  const auto url = split_url(endpoint_);
  httplib::Client cli(url.base);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(60);

  nlohmann::json body = {{"model", model_},
                         {"temperature", 0},
                         {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  auto res = cli.Post(url.path, auth_headers(api_key_), body.dump(), "application/json");
  if (!res) throw RemoteExtractionError("model request failed: " + httplib::to_string(res.error()), "");
  if (res->status != 200) {
    throw RemoteExtractionError("model endpoint returned HTTP " + std::to_string(res->status), res->body);
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw RemoteExtractionError(std::string("unexpected model payload: ") + e.what(), res->body);
  }
}

// --- detector client ---------------------------------------------------------

HttpDetectorClient::HttpDetectorClient(std::string endpoint, std::string api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {}

std::unique_ptr<HttpDetectorClient> HttpDetectorClient::from_environment() {
  auto endpoint = env_or_empty("DETECTOR_ENDPOINT");
  if (endpoint.empty()) throw std::runtime_error("DETECTOR_ENDPOINT is not set");
  return std::make_unique<HttpDetectorClient>(std::move(endpoint), env_or_empty("DETECTOR_API_KEY"));
}

std::string HttpDetectorClient::detect(const EncodedImage& image, const std::string& prompt) {
  const auto url = split_url(endpoint_);
  httplib::Client cli(url.base);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(60);

  nlohmann::json body = {{"prompt", prompt},
                         {"image_b64", base64_encode(image.bytes)},
                         {"mime", image.mime},
                         {"width", image.width},
                         {"height", image.height}};
  auto res = cli.Post(url.path, auth_headers(api_key_), body.dump(), "application/json");
  if (!res) throw RemoteDetectionError("detector request failed: " + httplib::to_string(res.error()), "");
  if (res->status != 200) {
    throw RemoteDetectionError("detector endpoint returned HTTP " + std::to_string(res->status), res->body);
  }
  return res->body;
}

}  // namespace travnav
