#include "lqvrp/chat_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace lqvrp {

using nlohmann::json;

ChatBackendConfig ChatBackendConfig::from_env() {
  ChatBackendConfig cfg;
  if (const char* v = std::getenv("LQVRP_ADVISOR_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("LQVRP_ADVISOR_MODEL")) cfg.model = v;
  if (const char* v = std::getenv("LQVRP_ADVISOR_API_KEY")) cfg.api_key = v;
  return cfg;
}

ChatCompletionsBackend::ChatCompletionsBackend(ChatBackendConfig cfg) : cfg_(std::move(cfg)) {
  const auto scheme_end = cfg_.base_url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("advisor base URL needs a scheme: " + cfg_.base_url);
  const auto path_start = cfg_.base_url.find('/', scheme_end + 3);
  origin_ = cfg_.base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : cfg_.base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

std::string ChatCompletionsBackend::request_body(const std::string& prompt,
                                                 const DecodeParams& params) const {
  json body = {{"model", cfg_.model},
               {"messages",
                json::array({{{"role", "system"}, {"content", cfg_.system_prompt}},
                             {{"role", "user"}, {"content", prompt}}})},
               {"temperature", params.temperature},
               {"max_tokens", params.max_tokens}};
  return body.dump();
}

std::string ChatCompletionsBackend::reply_content(const std::string& response_body) {
  try {
    const auto doc = json::parse(response_body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed chat completion response: ") + e.what());
  }
}

void ChatCompletionsBackend::log(const std::string& prompt, const std::string& reply,
                                 const std::string& status) const {
  if (cfg_.log_path.empty()) return;
  std::ofstream out(cfg_.log_path, std::ios::app);
  out << json{{"backend", name()}, {"status", status}, {"prompt", prompt}, {"reply", reply}}.dump()
      << "\n";
}

std::string ChatCompletionsBackend::complete(const std::string& prompt, const DecodeParams& params) {
  ++calls_;
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  const std::string body = request_body(prompt, params);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms * (1 << (attempt - 1))));
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      log(prompt, "", last_error);
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      log(prompt, res->body, last_error);
      continue;
    }
    if (res->status != 200) {
      log(prompt, res->body, "HTTP " + std::to_string(res->status));
      throw BackendUnavailable("advisor returned HTTP " + std::to_string(res->status));
    }
    std::string content = reply_content(res->body);
    log(prompt, content, "ok");
    return content;
  }
  throw BackendUnavailable("advisor unreachable after " + std::to_string(cfg_.retries + 1) +
                           " attempts: " + last_error);
}

}  // namespace lqvrp
