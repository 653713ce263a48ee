#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace testing_support {

/// Loopback HTTP server replaying a scripted list of (status, body) replies.
/// When the script runs out it answers 200 with a fixed chat completion.
class FakeServer {
public:
    struct Reply {
        int status;
        std::string body;
    };
    struct Request {
        std::string path;
        std::string authorization;
        std::string body;
    };

    explicit FakeServer(std::vector<Reply> script = {}) : script_(script.begin(), script.end()) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            Reply r{200, chat_body("scripted reply")};
            {
                std::lock_guard lock(mu_);
                requests_.push_back({req.path, req.get_header_value("Authorization"), req.body});
                if (!script_.empty()) {
                    r = script_.front();
                    script_.pop_front();
                }
            }
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
        server_.Post(R"(/.*)", handler);
        server_.Get(R"(/.*)", handler);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::vector<Request> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

    std::size_t hits() const {
        std::lock_guard lock(mu_);
        return requests_.size();
    }

    static std::string chat_body(const std::string& content) {
        nlohmann::json j = {{"model", "fake-model"},
                            {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
                            {"usage", {{"prompt_tokens", 5}, {"completion_tokens", 2}, {"total_tokens", 7}}}};
        return j.dump();
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mu_;
    std::deque<Reply> script_;
    std::vector<Request> requests_;
};

}  // namespace testing_support
