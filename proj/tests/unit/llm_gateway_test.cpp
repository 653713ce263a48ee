#include "chartnl/errors.hpp"
#include "chartnl/llm_gateway.hpp"
#include "chartnl/pipeline.hpp"
#include "fake_server.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

using namespace chartnl;
using testing_support::FakeServer;

namespace {

constexpr const char* kKeyEnv = "CHARTNL_TEST_GATEWAY_KEY";
constexpr const char* kSecret = "sk-test-8f3a1c-never-print-me";

struct Delays {
    std::vector<double> seconds;
    Sleeper sleeper() {
        return [this](std::chrono::duration<double> d) { seconds.push_back(d.count()); };
    }
};

ModelConfig config_for(const FakeServer& server) {
    ModelConfig cfg;
    cfg.endpoint_url = server.url();
    cfg.api_key_env = kKeyEnv;
    cfg.timeout_seconds = 5;
    return cfg;
}

RenderedPrompt prompt(const std::string& text) {
    RenderedPrompt p;
    p.task = PromptTask::Coding;
    p.text = text;
    return p;
}

class GatewayTest : public ::testing::Test {
protected:
    void SetUp() override { setenv(kKeyEnv, kSecret, 1); }
    void TearDown() override { unsetenv(kKeyEnv); }
};

}  // namespace

TEST(ModelConfigTest, Defaults) {
    ModelConfig cfg;
    EXPECT_EQ(cfg.temperature, 0.0);
    EXPECT_EQ(cfg.api_key_env, "CHARTNL_API_KEY");
    EXPECT_NO_THROW(validate(cfg));
    cfg.temperature = -1;
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(ModelConfigTest, RequestBodyShape) {
    ModelConfig cfg;
    cfg.model_name = "m";
    auto j = nlohmann::json::parse(chat_request_body(prompt("hello"), cfg));
    EXPECT_EQ(j["model"], "m");
    EXPECT_EQ(j["temperature"], 0.0);
    ASSERT_EQ(j["messages"].size(), 1u);
    EXPECT_EQ(j["messages"][0]["role"], "user");
    EXPECT_EQ(j["messages"][0]["content"], "hello");
}

TEST(ModelConfigTest, ResponseParsing) {
    ModelConfig cfg;
    Completion c = parse_chat_response(FakeServer::chat_body("hi"), cfg);
    EXPECT_EQ(c.text, "hi");
    EXPECT_EQ(c.model, "fake-model");
    EXPECT_EQ(c.usage.total_tokens, 7);
    EXPECT_THROW(parse_chat_response("{}", cfg), MalformedResponseError);
    EXPECT_THROW(parse_chat_response("not json", cfg), MalformedResponseError);
    EXPECT_THROW(parse_chat_response(R"({"choices":[{"message":{"content":null}}]})", cfg), MalformedResponseError);
}

TEST(Backoff, ExponentialSchedule) {
    ModelConfig cfg;
    EXPECT_DOUBLE_EQ(HttpGateway::backoff_delay(cfg, 0), 1.0);
    EXPECT_DOUBLE_EQ(HttpGateway::backoff_delay(cfg, 1), 2.0);
    EXPECT_DOUBLE_EQ(HttpGateway::backoff_delay(cfg, 3), 8.0);
}

TEST_F(GatewayTest, TwoRateLimitsThenSuccess) {
    FakeServer server({{429, "{}"}, {429, "{}"}, {200, FakeServer::chat_body("third time")}});
    Delays delays;
    HttpGateway gw(4, delays.sleeper(), 7);
    ModelConfig cfg = config_for(server);
    cfg.max_retries = 3;
    Completion c = gw.complete(prompt("p"), cfg);
    EXPECT_EQ(c.text, "third time");
    EXPECT_EQ(c.attempts, 3);
    EXPECT_EQ(server.hits(), 3u);
    ASSERT_EQ(delays.seconds.size(), 2u);
    EXPECT_GE(delays.seconds[0], 1.0);
    EXPECT_LE(delays.seconds[0], 1.25);
    EXPECT_GE(delays.seconds[1], 2.0);
    EXPECT_LE(delays.seconds[1], 2.5);
    for (const auto& r : server.requests()) {
        EXPECT_EQ(r.path, "/v1/chat/completions");
        EXPECT_EQ(r.authorization, std::string("Bearer ") + kSecret);
    }
}

TEST_F(GatewayTest, RetriesExhausted) {
    FakeServer server({{503, ""}, {429, ""}, {500, ""}});
    Delays delays;
    HttpGateway gw(4, delays.sleeper());
    ModelConfig cfg = config_for(server);
    cfg.max_retries = 2;
    EXPECT_THROW(gw.complete(prompt("p"), cfg), RateLimitExhausted);
    EXPECT_EQ(server.hits(), 3u);
    EXPECT_EQ(delays.seconds.size(), 2u);
}

TEST_F(GatewayTest, AuthAndClientErrorsAreNotRetried) {
    {
        FakeServer server({{401, R"({"error":"bad key"})"}});
        HttpGateway gw(4, Delays{}.sleeper());
        EXPECT_THROW(gw.complete(prompt("p"), config_for(server)), AuthError);
        EXPECT_EQ(server.hits(), 1u);
    }
    {
        FakeServer server({{400, R"({"error":"bad request"})"}});
        HttpGateway gw(4, Delays{}.sleeper());
        EXPECT_THROW(gw.complete(prompt("p"), config_for(server)), HttpError);
        EXPECT_EQ(server.hits(), 1u);
    }
    {
        FakeServer server({{200, R"({"choices":[]})"}});
        HttpGateway gw(4, Delays{}.sleeper());
        EXPECT_THROW(gw.complete(prompt("p"), config_for(server)), MalformedResponseError);
    }
}

TEST_F(GatewayTest, MissingKeyFailsBeforeNetwork) {
    FakeServer server;
    unsetenv(kKeyEnv);
    HttpGateway gw(4, Delays{}.sleeper());
    EXPECT_THROW(gw.complete(prompt("p"), config_for(server)), AuthError);
    EXPECT_EQ(server.hits(), 0u);
}

TEST_F(GatewayTest, UnreachableEndpoint) {
    // Port 1 on loopback refuses connections.
    ModelConfig cfg;
    cfg.endpoint_url = "http://127.0.0.1:1";
    cfg.api_key_env = kKeyEnv;
    cfg.max_retries = 1;
    cfg.timeout_seconds = 2;
    Delays delays;
    HttpGateway gw(1, delays.sleeper());
    EXPECT_THROW(gw.complete(prompt("p"), cfg), HttpError);
    EXPECT_EQ(delays.seconds.size(), 1u);
}

TEST_F(GatewayTest, ConcurrencyIsBounded) {
    FakeServer server;
    HttpGateway gw(2, Delays{}.sleeper());
    ModelConfig cfg = config_for(server);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { gw.complete(prompt("p"), cfg); });
    for (auto& t : threads) t.join();
    EXPECT_EQ(server.hits(), 8u);
    EXPECT_LE(gw.peak_in_flight(), 2u);
    EXPECT_GE(gw.peak_in_flight(), 1u);
}

TEST_F(GatewayTest, ApiKeyNeverObservable) {
    std::vector<std::string> observed;
    ModelConfig base;
    base.api_key_env = kKeyEnv;
    observed.push_back(chat_request_body(prompt("p"), base));
    {
        FakeServer server({{429, ""}, {429, ""}});
        HttpGateway gw(1, Delays{}.sleeper());
        ModelConfig cfg = config_for(server);
        cfg.max_retries = 1;
        try {
            gw.complete(prompt("p"), cfg);
        } catch (const Error& e) {
            observed.push_back(e.describe());
        }
    }
    for (int status : {401, 404}) {
        FakeServer server({{status, "nope"}});
        HttpGateway gw(1, Delays{}.sleeper());
        try {
            gw.complete(prompt("p"), config_for(server));
        } catch (const Error& e) {
            observed.push_back(e.describe());
        }
    }
    {
        // A full generation run over the wire, then its serialized dataset.
        FakeServer server({{200, FakeServer::chat_body("Step 1. Views: one\nStep 2. Marks: bars\nStep 3. A bar chart.")}});
        HttpGateway gw(2, Delays{}.sleeper());
        GenerationOptions opts;
        opts.tasks = {NLType::CaptionL1};
        opts.model = config_for(server);
        opts.created_at = "2020-01-01T00:00:00Z";
        ChartInput chart{"c", ExternalizedSpec{parse_spec(R"({"mark":"bar"})", "c"), {}, {}, {}}, nullptr};
        auto records = run_generation(chart, opts, gw);
        observed.push_back(dataset_to_jsonl(DatasetFile{{"corpus", kToolVersion, config_digest(opts)}, records}));
        EXPECT_EQ(server.hits(), 1u);
        EXPECT_EQ(records.size(), 1u);
    }
    ASSERT_EQ(observed.size(), 5u);
    for (const auto& text : observed) EXPECT_EQ(text.find(kSecret), std::string::npos) << text;
}

TEST(MockGatewayTest, CannedRepliesAndCallLog) {
    MockGateway gw(false);
    gw.set_reply("hello", "canned");
    ModelConfig cfg;
    EXPECT_EQ(gw.complete(prompt("hello"), cfg).text, "canned");
    EXPECT_EQ(gw.complete(prompt("hello"), cfg).text, "canned");
    EXPECT_EQ(gw.call_count(), 2u);
    EXPECT_EQ(gw.calls()[0].text, "hello");
    EXPECT_THROW(gw.complete(prompt("unknown"), cfg), Error);
}

TEST(MockGatewayTest, ResponderAndScaffold) {
    MockGateway gw;
    gw.set_responder([](const RenderedPrompt& p) -> std::optional<std::string> {
        if (p.text == "special") return "from responder";
        return std::nullopt;
    });
    ModelConfig cfg;
    EXPECT_EQ(gw.complete(prompt("special"), cfg).text, "from responder");
    auto q = build_question_prompt(R"({"mark":"bar","encoding":{"x":{"field":"a","type":"nominal"}}})");
    auto reply = gw.complete(q, cfg).text;
    EXPECT_NO_THROW(parse_steps(reply, step_labels(11)));
    EXPECT_EQ(reply, MockGateway::scaffold_reply(q));
}

TEST(Steps, ThreeSteps) {
    auto p = parse_steps("Step 1. Features:  big  \nStep 2. Operations: max; min\n\nStep 3. Questions: q1; q2; q3\n",
                         step_labels(3));
    ASSERT_EQ(p.steps.size(), 3u);
    EXPECT_EQ(p.steps[0].title, "Features");
    EXPECT_EQ(p.steps[0].body, "big");
    EXPECT_EQ(p.body("Step 2."), "max; min");
    EXPECT_EQ(split_list(p.body("Step 3.")), (std::vector<std::string>{"q1", "q2", "q3"}));
}

TEST(Steps, QuestionsList) {
    auto p = parse_steps("Step 3. Questions: q1; q2; q3", {"Step 3."});
    EXPECT_EQ(split_list(p.body("Step 3.")).size(), 3u);
}

TEST(Steps, MissingStep) {
    try {
        parse_steps("Step 1. a\nStep 3. c", step_labels(3));
        FAIL();
    } catch (const MissingStepError& e) {
        EXPECT_STREQ(e.what(), "Step 2.");
    }
}

TEST(Steps, EmptyStep) { EXPECT_THROW(parse_steps("Step 1.\nStep 2. b", step_labels(2)), EmptyStepError); }

TEST(Steps, LabelVariantsAndTerminators) {
    auto p = parse_steps("**Step 1:** Data: sales\nmore\n## heading\nignored\nStep 2. x", step_labels(2));
    EXPECT_EQ(p.steps[0].title, "Data");
    EXPECT_EQ(p.steps[0].body, "sales\nmore");
    EXPECT_EQ(p.steps[1].body, "x");
    // A question ending in '?' before the colon is not a title.
    auto q = parse_steps("Step 1. What is shown? Answer: bars", step_labels(1));
    EXPECT_EQ(q.steps[0].title, "");
    EXPECT_EQ(q.steps[0].body, "What is shown? Answer: bars");
}

TEST(Steps, TextAfterLabel) {
    EXPECT_EQ(text_after_label("blah\nLevel 2 NL Description:  The max is 5. ", "Level 2 NL Description:"),
              "The max is 5.");
    EXPECT_EQ(text_after_label("  plain  ", "Missing:"), "plain");
}

TEST(StepsProperty, RenderParseRoundTrip) {
    const std::vector<std::string> words = {"bar", "sales", "max", "region", "the", "of", "42", "a;b", "(x)", "-"};
    std::mt19937_64 rng(13);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 11);
        std::vector<StepEntry> steps;
        for (int i = 0; i < n; ++i) {
            StepEntry e;
            e.label = "Step " + std::to_string(i + 1) + ".";
            if (rng() % 2) {
                const int tw = 1 + static_cast<int>(rng() % 3);
                for (int w = 0; w < tw; ++w) e.title += (w ? " " : "") + words[rng() % 7];
            }
            const int bw = 1 + static_cast<int>(rng() % 12);
            for (int w = 0; w < bw; ++w) {
                e.body += (w ? ((rng() % 5 == 0) ? "\n" : " ") : "") + words[rng() % words.size()];
            }
            steps.push_back(e);
        }
        std::vector<std::string> labels;
        for (const auto& s : steps) labels.push_back(s.label);
        auto parsed = parse_steps(render_steps(steps), labels);
        ASSERT_EQ(parsed.steps.size(), steps.size());
        for (std::size_t i = 0; i < steps.size(); ++i) {
            EXPECT_EQ(parsed.steps[i].body, steps[i].body);
            EXPECT_EQ(parsed.steps[i].title, steps[i].title);
        }
    }
}
