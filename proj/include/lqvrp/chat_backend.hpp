#pragma once

#include <string>

#include "lqvrp/advisor.hpp"

namespace lqvrp {

struct ChatBackendConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  std::string api_key;            // sent as a bearer token when non-empty
  std::string system_prompt = "You are a careful route-planning assistant.";
  double timeout_seconds = 60.0;
  int retries = 2;
  int backoff_ms = 500;
  std::string log_path;           // JSON lines of every request/reply; empty = no log

  // Reads LQVRP_ADVISOR_BASE_URL, LQVRP_ADVISOR_MODEL and LQVRP_ADVISOR_API_KEY
  // on top of the defaults.
  static ChatBackendConfig from_env();
};

// Client for servers speaking the chat-completions JSON protocol
// (POST {base_url}/chat/completions).
class ChatCompletionsBackend : public AdvisorBackend {
 public:
  explicit ChatCompletionsBackend(ChatBackendConfig cfg);

  std::string complete(const std::string& prompt, const DecodeParams& params) override;
  std::string name() const override { return "chat:" + cfg_.model; }

  // Request body for a prompt, exposed for inspection.
  std::string request_body(const std::string& prompt, const DecodeParams& params) const;
  // Extracts choices[0].message.content; throws BackendUnavailable otherwise.
  static std::string reply_content(const std::string& response_body);

 private:
  void log(const std::string& prompt, const std::string& reply, const std::string& status) const;

  ChatBackendConfig cfg_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix + /chat/completions
};

}  // namespace lqvrp
