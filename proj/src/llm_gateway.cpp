#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "chartnl/llm_gateway.hpp"

#include "chartnl/errors.hpp"
#include "chartnl/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace chartnl {

void validate(const ModelConfig& cfg) {
    if (!(cfg.temperature >= 0.0 && cfg.temperature <= 2.0))
        throw ConfigError("temperature must lie in [0, 2]");
    if (cfg.max_retries < 0) throw ConfigError("max_retries must be non-negative");
    if (!(cfg.timeout_seconds > 0.0)) throw ConfigError("timeout_seconds must be positive");
    if (cfg.model_name.empty()) throw ConfigError("model name is empty");
    if (cfg.backoff_base_seconds < 0.0 || cfg.backoff_factor < 1.0) throw ConfigError("invalid backoff settings");
}

RequestSlots::RequestSlots(unsigned limit) : limit_(limit == 0 ? 1 : limit) {}

void RequestSlots::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_use_ < limit_; });
    ++in_use_;
    peak_ = std::max(peak_, in_use_);
}

void RequestSlots::release() {
    {
        std::lock_guard lock(mu_);
        --in_use_;
    }
    cv_.notify_one();
}

unsigned RequestSlots::peak() const {
    std::lock_guard lock(mu_);
    return peak_;
}

namespace {

struct SlotGuard {
    RequestSlots& slots;
    explicit SlotGuard(RequestSlots& s) : slots(s) { slots.acquire(); }
    ~SlotGuard() { slots.release(); }
};

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.scheme_host_port = url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    e.path = prefix + "/v1/chat/completions";
    return e;
}

std::string snippet(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool is_timeout(httplib::Error e) {
    return e == httplib::Error::ConnectionTimeout || e == httplib::Error::Read || e == httplib::Error::Write;
}

}  // namespace

HttpGateway::HttpGateway(unsigned max_in_flight, Sleeper sleeper, std::uint64_t jitter_seed)
    : slots_(max_in_flight), sleeper_(std::move(sleeper)), rng_state_(jitter_seed) {
    if (!sleeper_) sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

double HttpGateway::backoff_delay(const ModelConfig& cfg, int retry) {
    return cfg.backoff_base_seconds * std::pow(cfg.backoff_factor, retry);
}

double HttpGateway::jitter(double delay) {
    std::uint64_t draw;
    {
        std::lock_guard lock(rng_mu_);
        draw = derive_seed(rng_state_, 0);
        rng_state_ = draw;
    }
    const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
    return delay * (1.0 + 0.25 * u);
}

std::string chat_request_body(const RenderedPrompt& prompt, const ModelConfig& cfg) {
    nlohmann::ordered_json body;
    body["model"] = cfg.model_name;
    body["temperature"] = cfg.temperature;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt.text}}});
    return body.dump();
}

Completion parse_chat_response(std::string_view body, const ModelConfig& cfg) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedResponseError("response is not a JSON object");
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty())
        throw MalformedResponseError("response has no choices");
    const auto& first = (*choices)[0];
    if (!first.is_object() || !first.contains("message") || !first["message"].is_object())
        throw MalformedResponseError("first choice has no message");
    const auto& message = first["message"];
    if (!message.contains("content") || !message["content"].is_string())
        throw MalformedResponseError("message has no text content");
    Completion c;
    c.text = message["content"].get<std::string>();
    c.model = j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>() : cfg.model_name;
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        auto field = [&](const char* name) -> std::optional<std::int64_t> {
            auto it = u->find(name);
            if (it == u->end() || !it->is_number_integer()) return std::nullopt;
            return it->get<std::int64_t>();
        };
        c.usage.prompt_tokens = field("prompt_tokens");
        c.usage.completion_tokens = field("completion_tokens");
        c.usage.total_tokens = field("total_tokens");
    }
    return c;
}

Completion HttpGateway::complete(const RenderedPrompt& prompt, const ModelConfig& cfg) {
    validate(cfg);
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw AuthError("environment variable " + cfg.api_key_env + " holding the API key is not set");
    const Endpoint endpoint = split_endpoint(cfg.endpoint_url);
    const std::string body = chat_request_body(prompt, cfg);
    const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

    SlotGuard slot(slots_);
    std::string last_problem;
    bool last_was_timeout = false;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) sleeper_(std::chrono::duration<double>(jitter(backoff_delay(cfg, attempt - 1))));

        httplib::Client client(endpoint.scheme_host_port);
        const auto seconds = static_cast<time_t>(cfg.timeout_seconds);
        const auto micros = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(seconds)) * 1e6);
        client.set_connection_timeout(seconds, micros);
        client.set_read_timeout(seconds, micros);
        client.set_write_timeout(seconds, micros);

        auto res = client.Post(endpoint.path, headers, body, "application/json");
        if (!res) {
            last_was_timeout = is_timeout(res.error());
            last_problem = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        last_was_timeout = false;
        const int status = res->status;
        if (status == 401 || status == 403)
            throw AuthError("endpoint rejected the credentials (HTTP " + std::to_string(status) + ")");
        if (status == 429 || status >= 500) {
            last_problem = "HTTP " + std::to_string(status);
            continue;
        }
        if (status < 200 || status >= 300)
            throw HttpError("HTTP " + std::to_string(status) + ": " + snippet(res->body));
        Completion c = parse_chat_response(res->body, cfg);
        c.attempts = attempt + 1;
        return c;
    }
    const std::string msg =
        "giving up after " + std::to_string(cfg.max_retries + 1) + " attempts; last: " + last_problem;
    if (last_was_timeout) throw TimeoutError(msg);
    if (last_problem.rfind("transport", 0) == 0) throw HttpError(msg);
    throw RateLimitExhausted(msg);
}

}  // namespace chartnl
