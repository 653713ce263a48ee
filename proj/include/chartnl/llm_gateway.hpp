#pragma once

#include "chartnl/promptforge.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

struct ModelConfig {
    /// Base URL; requests go to `<endpoint_url>/v1/chat/completions`.
    std::string endpoint_url = "https://api.openai.com";
    std::string model_name = "gpt-4-0613";
    double temperature = 0.0;
    int max_retries = 3;
    double timeout_seconds = 120.0;
    /// Name of the environment variable holding the API key.
    std::string api_key_env = "CHARTNL_API_KEY";
    double backoff_base_seconds = 1.0;
    double backoff_factor = 2.0;
};

/// Throws ConfigError for out-of-range values.
void validate(const ModelConfig& cfg);

struct Usage {
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
    std::optional<std::int64_t> total_tokens;
};

struct Completion {
    std::string text;
    Usage usage;
    /// Model name reported by the backend (falls back to the configured one).
    std::string model;
    int attempts = 1;
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual Completion complete(const RenderedPrompt& prompt, const ModelConfig& cfg) = 0;
};

/// Counting semaphore with a run-time limit.
class RequestSlots {
public:
    explicit RequestSlots(unsigned limit);
    void acquire();
    void release();
    unsigned limit() const { return limit_; }
    unsigned peak() const;

private:
    unsigned limit_;
    unsigned in_use_ = 0;
    unsigned peak_ = 0;
    mutable std::mutex mu_;
    std::condition_variable cv_;
};

using Sleeper = std::function<void(std::chrono::duration<double>)>;

/// OpenAI-compatible chat-completions client. Shareable across threads.
class HttpGateway : public Gateway {
public:
    static constexpr unsigned kDefaultMaxInFlight = 4;

    explicit HttpGateway(unsigned max_in_flight = kDefaultMaxInFlight, Sleeper sleeper = {},
                         std::uint64_t jitter_seed = 0);

    Completion complete(const RenderedPrompt& prompt, const ModelConfig& cfg) override;

    /// Delay before retry number `retry` (0-based) without jitter.
    static double backoff_delay(const ModelConfig& cfg, int retry);

    unsigned peak_in_flight() const { return slots_.peak(); }

private:
    double jitter(double delay);

    RequestSlots slots_;
    Sleeper sleeper_;
    std::mutex rng_mu_;
    std::uint64_t rng_state_;
};

/// JSON body of a chat-completions request (a single user message).
std::string chat_request_body(const RenderedPrompt& prompt, const ModelConfig& cfg);

/// Parses a chat-completions response. Throws MalformedResponseError.
Completion parse_chat_response(std::string_view body, const ModelConfig& cfg);

/// Deterministic backend. Replies come from the canned map (keyed by prompt
/// text), then the responder, then the built-in scaffold responder if enabled.
class MockGateway : public Gateway {
public:
    using Responder = std::function<std::optional<std::string>(const RenderedPrompt&)>;

    explicit MockGateway(bool scaffold = true) : scaffold_(scaffold) {}

    void set_reply(std::string prompt_text, std::string reply);
    void set_responder(Responder r);

    Completion complete(const RenderedPrompt& prompt, const ModelConfig& cfg) override;

    std::vector<RenderedPrompt> calls() const;
    std::size_t call_count() const;

    /// Well-formed reply for any task, filled from the prompt's substitutions.
    static std::string scaffold_reply(const RenderedPrompt& prompt);

private:
    bool scaffold_;
    std::map<std::string, std::string> canned_;
    Responder responder_;
    mutable std::mutex mu_;
    std::vector<RenderedPrompt> calls_;
};

struct StepEntry {
    /// Expected label, e.g. "Step 3."
    std::string label;
    /// Heading after the label, e.g. "Questions"; may be empty.
    std::string title;
    std::string body;
};

struct StepParse {
    std::vector<StepEntry> steps;
    std::string raw;

    /// Body for a label; throws MissingStepError when absent.
    const std::string& body(std::string_view label) const;
};

/// Labels "Step 1." .. "Step n."
std::vector<std::string> step_labels(int n);

/// Extracts each expected step section. A label matches at the start of a line
/// as "Step N." or "Step N:"; a short heading ending in ':' is split off as the
/// title. A body runs to the next step label, a "View #" line, a "##" line or
/// the end. Labels must appear in increasing order. Throws MissingStepError and
/// EmptyStepError.
StepParse parse_steps(std::string_view text, const std::vector<std::string>& expected);

/// Renders steps in the canonical "Step N. Title: body" layout.
std::string render_steps(const std::vector<StepEntry>& steps);

/// Splits on `sep`, trims, and drops empty items.
std::vector<std::string> split_list(std::string_view body, char sep = ';');

/// Text after the last occurrence of `label` (e.g. "Level 2 NL Description:"),
/// trimmed; the whole text trimmed when the label is absent.
std::string text_after_label(std::string_view text, std::string_view label);

}  // namespace chartnl
