#pragma once

// Live provider adapters speaking the OpenAI Responses API and the Anthropic
// Messages API, each with the provider's native web-search tool enabled.
// Credentials come from OPENAI_API_KEY / ANTHROPIC_API_KEY; the held-constant
// system prompt, temperature, and tool description come from one config file
// shared across cells. Requires CPPHTTPLIB_OPENSSL_SUPPORT.

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "paraudit/adapter.hpp"
#include "paraudit/corpus.hpp"
#include "paraudit/errors.hpp"
#include "paraudit/extraction.hpp"
#include "paraudit/run.hpp"

namespace paraudit {

struct LiveConfig {
  std::string system_prompt;
  double temperature = 1.0;
  std::string tool_description;
  int timeout_seconds = 300;
  int max_tokens = 4096;
  std::string openai_judge_model = "gpt-5-mini";
  std::string anthropic_judge_model = "claude-haiku-4-5";
  std::string judge_prompt_template =
      "List every brand or product named in the following assistant answer. "
      "Reply with a JSON array of [\"brand\", \"sentiment\"] pairs where sentiment is "
      "one of recommended, conditional, neutral, negative. A brand is 'recommended' "
      "only if the answer terminally endorses it. Reply with the JSON array only.\n\n"
      "Answer:\n{completion}";
};

inline LiveConfig load_live_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open live config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("live config " + path + ": " + e.what());
  }
  LiveConfig cfg;
  cfg.system_prompt = j.at("system_prompt").get<std::string>();
  cfg.temperature = j.value("temperature", 1.0);
  cfg.tool_description = j.value("tool_description", "");
  cfg.timeout_seconds = j.value("timeout_seconds", 300);
  cfg.max_tokens = j.value("max_tokens", 4096);
  if (j.contains("judges")) {
    cfg.openai_judge_model = j["judges"].value("openai_model", cfg.openai_judge_model);
    cfg.anthropic_judge_model =
        j["judges"].value("anthropic_model", cfg.anthropic_judge_model);
  }
  cfg.judge_prompt_template = j.value("judge_prompt_template", cfg.judge_prompt_template);
  return cfg;
}

namespace detail {

inline std::string require_env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0')
    throw ExecutionError(std::string("missing credential environment variable ") + name);
  return v;
}

inline nlohmann::json post_json(const std::string& host, const std::string& path,
                                const httplib::Headers& headers,
                                const nlohmann::json& body, int timeout_seconds) {
  httplib::SSLClient client(host);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(std::chrono::seconds(timeout_seconds));
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TransientAdapterError("transport failure talking to " + host);
  if (res->status == 429 || res->status >= 500)
    throw TransientAdapterError(host + " returned status " + std::to_string(res->status));
  if (res->status != 200)
    throw ExecutionError(host + " returned status " + std::to_string(res->status) + ": " +
                         res->body);
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw TransientAdapterError("unparseable response from " + host + ": " + e.what());
  }
}

}  // namespace detail

// Prompt text lookup shared by the live adapters: surface form id -> text.
using SurfaceTexts = std::map<std::string, std::string>;

inline SurfaceTexts surface_texts(const Corpus& corpus) {
  SurfaceTexts texts;
  for (const auto& b : corpus.bases) texts[b.id] = b.text;
  for (const auto& v : corpus.variants) texts[v.id] = v.text;
  return texts;
}

class OpenAiAdapter : public ProviderAdapter {
 public:
  OpenAiAdapter(LiveConfig config, SurfaceTexts texts)
      : config_(std::move(config)), texts_(std::move(texts)),
        api_key_(detail::require_env("OPENAI_API_KEY")) {}

  RunRecord complete(const PlanEntry& entry) override {
    auto it = texts_.find(entry.surface_form_id);
    if (it == texts_.end())
      throw ExecutionError("no prompt text for surface form " + entry.surface_form_id);
    nlohmann::json tool{{"type", "web_search"}};
    nlohmann::json body{
        {"model", entry.cell.model},
        {"instructions", config_.system_prompt},
        {"input", it->second},
        {"temperature", config_.temperature},
        {"reasoning", {{"effort", to_string(entry.cell.effort)}}},
        {"tools", nlohmann::json::array({tool})},
    };
    RunRecord record;
    record.started_at = iso8601_now();
    nlohmann::json res = detail::post_json(
        "api.openai.com", "/v1/responses",
        {{"Authorization", "Bearer " + api_key_}}, body, config_.timeout_seconds);
    record.finished_at = iso8601_now();
    record.run_id = entry.run_id;
    record.surface_form_id = entry.surface_form_id;
    record.cell = entry.cell;
    for (const auto& item : res.value("output", nlohmann::json::array())) {
      if (item.value("type", "") != "message") continue;
      for (const auto& part : item.value("content", nlohmann::json::array())) {
        if (part.value("type", "") != "output_text") continue;
        record.completion_text += part.value("text", "");
        for (const auto& ann : part.value("annotations", nlohmann::json::array()))
          if (ann.value("type", "") == "url_citation" && ann.contains("url"))
            record.citations.push_back(ann["url"].get<std::string>());
      }
    }
    if (record.completion_text.empty())
      throw TransientAdapterError("empty completion from OpenAI");
    record.provider_meta["response_id"] = res.value("id", "");
    return record;
  }

 private:
  LiveConfig config_;
  SurfaceTexts texts_;
  std::string api_key_;
};

class AnthropicAdapter : public ProviderAdapter {
 public:
  AnthropicAdapter(LiveConfig config, SurfaceTexts texts)
      : config_(std::move(config)), texts_(std::move(texts)),
        api_key_(detail::require_env("ANTHROPIC_API_KEY")) {}

  RunRecord complete(const PlanEntry& entry) override {
    auto it = texts_.find(entry.surface_form_id);
    if (it == texts_.end())
      throw ExecutionError("no prompt text for surface form " + entry.surface_form_id);
    nlohmann::json tool{{"type", "web_search_20260209"}, {"name", "web_search"}};
    int thinking_budget = entry.cell.effort == ReasoningEffort::high ? 8192 : 1024;
    nlohmann::json body{
        {"model", entry.cell.model},
        {"max_tokens", config_.max_tokens},
        {"system", config_.system_prompt},
        {"temperature", config_.temperature},
        {"thinking", {{"type", "enabled"}, {"budget_tokens", thinking_budget}}},
        {"tools", nlohmann::json::array({tool})},
        {"messages", nlohmann::json::array(
                         {{{"role", "user"}, {"content", it->second}}})},
    };
    RunRecord record;
    record.started_at = iso8601_now();
    nlohmann::json res = detail::post_json(
        "api.anthropic.com", "/v1/messages",
        {{"x-api-key", api_key_}, {"anthropic-version", "2023-06-01"}}, body,
        config_.timeout_seconds);
    record.finished_at = iso8601_now();
    record.run_id = entry.run_id;
    record.surface_form_id = entry.surface_form_id;
    record.cell = entry.cell;
    for (const auto& block : res.value("content", nlohmann::json::array())) {
      const std::string type = block.value("type", "");
      if (type == "text") {
        record.completion_text += block.value("text", "");
        for (const auto& cite : block.value("citations", nlohmann::json::array()))
          if (cite.contains("url")) record.citations.push_back(cite["url"].get<std::string>());
      } else if (type == "web_search_tool_result") {
        for (const auto& item : block.value("content", nlohmann::json::array()))
          if (item.contains("url")) record.citations.push_back(item["url"].get<std::string>());
      }
    }
    if (record.completion_text.empty())
      throw TransientAdapterError("empty completion from Anthropic");
    record.provider_meta["response_id"] = res.value("id", "");
    return record;
  }

 private:
  LiveConfig config_;
  SurfaceTexts texts_;
  std::string api_key_;
};

// Dispatches each plan entry to the adapter registered for its provider.
class RoutingAdapter : public ProviderAdapter {
 public:
  void add(const std::string& provider, std::unique_ptr<ProviderAdapter> adapter) {
    adapters_[provider] = std::move(adapter);
  }

  RunRecord complete(const PlanEntry& entry) override {
    auto it = adapters_.find(entry.cell.provider);
    if (it == adapters_.end())
      throw ExecutionError("no adapter configured for provider " + entry.cell.provider);
    return it->second->complete(entry);
  }

 private:
  std::map<std::string, std::unique_ptr<ProviderAdapter>> adapters_;
};

// LLM judge over a small provider model. Transport failures are retried with
// backoff; unparseable judge output yields an invalid verdict.
class LiveJudge : public JudgeAdapter {
 public:
  enum class Provider { openai, anthropic };

  LiveJudge(Provider provider, LiveConfig config)
      : provider_(provider), config_(std::move(config)) {
    api_key_ = detail::require_env(provider_ == Provider::openai ? "OPENAI_API_KEY"
                                                                 : "ANTHROPIC_API_KEY");
  }

  std::string judge_id() const override {
    return provider_ == Provider::openai ? "openai:" + config_.openai_judge_model
                                         : "anthropic:" + config_.anthropic_judge_model;
  }

  JudgeVerdict judge(const std::string&, const std::string& completion_text) override {
    std::string prompt = config_.judge_prompt_template;
    if (auto pos = prompt.find("{completion}"); pos != std::string::npos)
      prompt.replace(pos, 12, completion_text);
    std::string text;
    int attempts = 0;
    std::chrono::milliseconds backoff{1000};
    while (true) {
      ++attempts;
      try {
        text = ask(prompt);
        break;
      } catch (const TransientAdapterError&) {
        if (attempts >= 5) throw;
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, std::chrono::milliseconds{60000});
      }
    }
    return parse_verdict(text);
  }

 private:
  std::string ask(const std::string& prompt) const {
    if (provider_ == Provider::openai) {
      nlohmann::json body{{"model", config_.openai_judge_model}, {"input", prompt}};
      nlohmann::json res =
          detail::post_json("api.openai.com", "/v1/responses",
                            {{"Authorization", "Bearer " + api_key_}}, body,
                            config_.timeout_seconds);
      std::string text;
      for (const auto& item : res.value("output", nlohmann::json::array()))
        if (item.value("type", "") == "message")
          for (const auto& part : item.value("content", nlohmann::json::array()))
            if (part.value("type", "") == "output_text") text += part.value("text", "");
      return text;
    }
    nlohmann::json body{
        {"model", config_.anthropic_judge_model},
        {"max_tokens", 2048},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    nlohmann::json res = detail::post_json(
        "api.anthropic.com", "/v1/messages",
        {{"x-api-key", api_key_}, {"anthropic-version", "2023-06-01"}}, body,
        config_.timeout_seconds);
    std::string text;
    for (const auto& block : res.value("content", nlohmann::json::array()))
      if (block.value("type", "") == "text") text += block.value("text", "");
    return text;
  }

  JudgeVerdict parse_verdict(const std::string& text) const {
    JudgeVerdict verdict;
    verdict.judge_id = judge_id();
    auto start = text.find('[');
    auto end = text.rfind(']');
    if (start == std::string::npos || end == std::string::npos || end <= start) {
      verdict.valid = false;
      return verdict;
    }
    try {
      nlohmann::json arr = nlohmann::json::parse(text.substr(start, end - start + 1));
      for (const auto& pair : arr)
        verdict.brands.emplace_back(pair.at(0).get<std::string>(),
                                    sentiment_from_string(pair.at(1).get<std::string>()));
    } catch (const std::exception&) {
      verdict.valid = false;
      verdict.brands.clear();
    }
    return verdict;
  }

  Provider provider_;
  LiveConfig config_;
  std::string api_key_;
};

}  // namespace paraudit
