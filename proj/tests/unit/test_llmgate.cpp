#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "crossling/common/error.hpp"
#include "crossling/common/text.hpp"
#include "crossling/llmgate/gateway.hpp"
#include "crossling/llmgate/providers.hpp"

#include <unistd.h>

namespace crossling::llm {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

CompletionRequest req(std::string prompt, double tau = 0.0, std::size_t k = 0) {
    CompletionRequest r;
    r.model = "gpt-3.5-turbo";
    r.user_prompt = std::move(prompt);
    r.temperature = tau;
    r.sample_index = k;
    r.language = "en";
    return r;
}

GatewayConfig fast() {
    GatewayConfig c;
    c.retry = RetryPolicy::immediate();
    return c;
}

TEST(CacheKey, CoversPromptTemperatureAndSample) {
    const auto base = req("q");
    EXPECT_EQ(base.cache_key(), req("q").cache_key());
    EXPECT_NE(base.cache_key(), req("q", 0.25).cache_key());
    EXPECT_NE(base.cache_key(), req("q", 0.0, 1).cache_key());
    auto sys = base;
    sys.system_prompt = "be brief";
    EXPECT_NE(base.cache_key(), sys.cache_key());
    auto lang = base;
    lang.language = "es";
    EXPECT_EQ(base.cache_key(), lang.cache_key());
    EXPECT_EQ(base.cache_key().size(), 64u);
}

TEST(Complete, MockOk) {
    auto mock = std::make_shared<MockChatProvider>();
    Gateway gw(mock, nullptr, fast());
    const auto rec = gw.complete(req("hello"));
    EXPECT_EQ(rec.text, "OK");
    EXPECT_FALSE(rec.filtered);
    EXPECT_FALSE(rec.from_cache);
}

TEST(Complete, SecondIdenticalRequestIsCached) {
    auto mock = std::make_shared<MockChatProvider>();
    Gateway gw(mock, nullptr, fast());
    gw.complete(req("hello"));
    const auto again = gw.complete(req("hello"));
    EXPECT_TRUE(again.from_cache);
    EXPECT_EQ(mock->calls(), 1u);
}

TEST(Complete, ContentFilterIsPersistedNotRetried) {
    auto mock = std::make_shared<MockChatProvider>(
        std::vector<MockChatProvider::Rule>{{"forbidden", {}, true, "content_filter", "", 0}});
    Gateway gw(mock, nullptr, fast());
    const auto rec = gw.complete(req("a forbidden topic"));
    EXPECT_TRUE(rec.filtered);
    EXPECT_EQ(rec.text, "");
    EXPECT_EQ(rec.refusal_reason, "content_filter");
    EXPECT_EQ(mock->calls(), 1u);
    EXPECT_TRUE(gw.complete(req("a forbidden topic")).filtered);
    EXPECT_EQ(mock->calls(), 1u);
}

TEST(Complete, RefusalPhraseMarksFiltered) {
    auto mock = std::make_shared<MockChatProvider>(
        std::vector<MockChatProvider::Rule>{{"x", {"I'm sorry, but I cannot assist with that."}}});
    auto cfg = fast();
    cfg.refusal_phrases = {"I CANNOT ASSIST"};
    Gateway gw(mock, nullptr, cfg);
    const auto rec = gw.complete(req("x"));
    EXPECT_TRUE(rec.filtered);
    EXPECT_TRUE(rec.text.empty());
    EXPECT_FALSE(rec.refusal_reason.empty());
}

TEST(Complete, RetriesTransientFailures) {
    auto mock = std::make_shared<MockChatProvider>(
        std::vector<MockChatProvider::Rule>{{"flaky", {"fine"}, false, "", "unavailable", 2}});
    std::vector<std::chrono::milliseconds> waits;
    GatewayConfig cfg;
    cfg.retry.jitter = 0.0;
    cfg.retry.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d); };
    Gateway gw(mock, nullptr, cfg);
    EXPECT_EQ(gw.complete(req("flaky")).text, "fine");
    EXPECT_EQ(mock->calls(), 3u);
    ASSERT_EQ(waits.size(), 2u);
    EXPECT_EQ(waits[0], std::chrono::seconds(1));
    EXPECT_EQ(waits[1], std::chrono::seconds(4));
}

TEST(Complete, GivesUpAfterBackoffSchedule) {
    auto mock = std::make_shared<MockChatProvider>(
        std::vector<MockChatProvider::Rule>{{"down", {}, false, "", "unavailable", 0}});
    Gateway gw(mock, nullptr, fast());
    try {
        gw.complete(req("down"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderUnavailable);
    }
    EXPECT_EQ(mock->calls(), 4u);
}

TEST(Complete, AuthErrorIsNotRetried) {
    auto mock =
        std::make_shared<MockChatProvider>(std::vector<MockChatProvider::Rule>{{"", {}, false, "", "auth", 0}});
    Gateway gw(mock, nullptr, fast());
    try {
        gw.complete(req("anything"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AuthError);
    }
    EXPECT_EQ(mock->calls(), 1u);
}

TEST(Complete, BudgetExceeded) {
    auto mock = std::make_shared<MockChatProvider>();
    auto cfg = fast();
    cfg.max_calls = 2;
    Gateway gw(mock, nullptr, cfg);
    gw.complete(req("a"));
    gw.complete(req("b"));
    gw.complete(req("a"));  // cached, free
    try {
        gw.complete(req("c"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
    }
}

TEST(Complete, TemperatureOutOfRange) {
    Gateway gw(std::make_shared<MockChatProvider>(), nullptr, fast());
    EXPECT_THROW(gw.complete(req("q", 1.5)), Error);
    EXPECT_THROW(gw.complete(req("q", -0.1)), Error);
}

TEST(ResponseCache, JournalReplayNeedsNoProvider) {
    const auto dir = fs::temp_directory_path() / ("crossling_cache_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    const auto journal = dir / "cache.jsonl";
    {
        auto mock = std::make_shared<MockChatProvider>(
            std::vector<MockChatProvider::Rule>{{"q", {"s0", "s1", "s2"}}, {"bad", {}, true, "content_filter"}});
        Gateway gw(mock, std::make_shared<ResponseCache>(journal), fast());
        gw.generate_samples(req("q", 0.5), 3);
        gw.complete(req("bad"));
    }
    Gateway replay(nullptr, std::make_shared<ResponseCache>(journal), fast());
    const auto recs = replay.generate_samples(req("q", 0.5), 3);
    EXPECT_EQ(recs[2].text, "s2");
    EXPECT_TRUE(recs[0].from_cache);
    EXPECT_TRUE(replay.complete(req("bad")).filtered);
    EXPECT_EQ(replay.provider_calls(), 0u);
    EXPECT_THROW(replay.complete(req("never seen")), Error);
    fs::remove_all(dir);
}

TEST(GenerateSamples, TenSamplesInIndexOrder) {
    auto mock = std::make_shared<MockChatProvider>(
        std::vector<MockChatProvider::Rule>{{"q", {"a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "a9"}}});
    Gateway gw(mock, nullptr, fast());
    const auto recs = gw.generate_samples(req("q"), kDefaultSamples, 4);
    ASSERT_EQ(recs.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(recs[i].request.sample_index, i);
        EXPECT_EQ(recs[i].text, "a" + std::to_string(i));
    }
}

TEST(GenerateSamples, DeterministicMockGivesIdenticalTexts) {
    Gateway gw(std::make_shared<MockChatProvider>(), nullptr, fast());
    const auto recs = gw.generate_samples(req("q"), 2);
    EXPECT_EQ(recs[0].text, recs[1].text);
}

TEST(GenerateSamples, FilteredSampleKeepsLength) {
    struct OneFiltered final : ChatProvider {
        ProviderReply chat(const CompletionRequest& r) override {
            if (r.sample_index == 3) return {"", true, "content_filter"};
            return {"ans", false, ""};
        }
    };
    Gateway gw(std::make_shared<OneFiltered>(), nullptr, fast());
    for (std::size_t k : {2u, 5u, 10u}) {
        const auto recs = gw.generate_samples(req("q" + std::to_string(k)), k);
        EXPECT_EQ(recs.size(), k);
        EXPECT_EQ(std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.filtered; }), k > 3 ? 1 : 0);
    }
    EXPECT_THROW(gw.generate_samples(req("q"), 1), Error);
}

std::vector<GenerationRecord> records(std::size_t n, std::size_t filtered) {
    std::vector<GenerationRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].request = req("q" + std::to_string(i));
        out[i].filtered = i < filtered;
    }
    return out;
}

TEST(FilteringRate, Table) {
    EXPECT_DOUBLE_EQ(filtering_rate(records(1000, 2)).at(0).percent, 0.2);
    EXPECT_DOUBLE_EQ(filtering_rate(records(50, 0)).at(0).percent, 0.0);
    EXPECT_DOUBLE_EQ(filtering_rate(records(7, 7)).at(0).percent, 100.0);
    EXPECT_THROW(filtering_rate({}), Error);
}

TEST(FilteringRate, GroupsPartitionTheRecords) {
    auto recs = records(30, 4);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].request.language = std::vector<std::string>{"en", "es", "zh"}[i % 3];
        recs[i].request.temperature = (i % 2) ? 0.5 : 1.0;
    }
    const auto table = filtering_rate(recs);
    EXPECT_EQ(table.size(), 6u);
    std::size_t total = 0;
    for (const auto& row : table) {
        total += row.total;
        EXPECT_GE(row.percent, 0.0);
        EXPECT_LE(row.percent, 100.0);
    }
    EXPECT_EQ(total, 30u);
}

TEST(MockProvider, LoadsFixtureFile) {
    const auto dir = fs::temp_directory_path() / ("crossling_mock_" + std::to_string(::getpid()));
    write_file(dir / "mock.json", R"({"default":"fallback","rules":[{"match":"zika","responses":["r0","r1"]}]})");
    auto mock = MockChatProvider::from_file(dir / "mock.json");
    EXPECT_EQ(mock.chat(req("about zika", 0, 1)).text, "r1");
    EXPECT_EQ(mock.chat(req("other")).text, "fallback");
    EXPECT_EQ(mock.calls(), 2u);
    fs::remove_all(dir);
}

class OpenAiServer : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& rq, httplib::Response& rs) {
            last_auth_ = rq.get_header_value("Authorization");
            const auto body = json::parse(rq.body);
            last_body_ = body;
            const std::string prompt = body["messages"].back()["content"];
            if (prompt == "filter me") {
                rs.set_content(R"({"choices":[{"message":{"content":null},"finish_reason":"content_filter"}]})",
                               "application/json");
            } else if (prompt == "filter400") {
                rs.status = 400;
                rs.set_content(R"({"error":{"code":"content_filter","message":"blocked"}})", "application/json");
            } else if (prompt == "busy") {
                ++busy_hits_;
                rs.status = 503;
            } else {
                rs.set_content(json{{"choices", {{{"message", {{"content", "echo: " + prompt}}},
                                                  {"finish_reason", "stop"}}}}}
                                   .dump(),
                               "application/json");
            }
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        ::setenv("CROSSLING_TEST_KEY", "sk-test", 1);
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::string last_auth_;
    json last_body_;
    std::atomic<int> busy_hits_{0};
};

TEST_F(OpenAiServer, RoundTrip) {
    auto provider = std::make_shared<OpenAiChatProvider>(base(), "CROSSLING_TEST_KEY");
    Gateway gw(provider, nullptr, fast());
    auto r = req("hi", 0.75);
    r.system_prompt = "sys";
    const auto rec = gw.complete(r);
    EXPECT_EQ(rec.text, "echo: hi");
    EXPECT_EQ(last_auth_, "Bearer sk-test");
    EXPECT_DOUBLE_EQ(last_body_["temperature"].get<double>(), 0.75);
    EXPECT_EQ(last_body_["messages"][0]["role"], "system");
    EXPECT_TRUE(gw.complete(req("filter me")).filtered);
    EXPECT_TRUE(gw.complete(req("filter400")).filtered);
}

TEST_F(OpenAiServer, ServerErrorsAreRetriedThenReported) {
    Gateway gw(std::make_shared<OpenAiChatProvider>(base(), "CROSSLING_TEST_KEY"), nullptr, fast());
    try {
        gw.complete(req("busy"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ProviderUnavailable);
    }
    EXPECT_EQ(busy_hits_.load(), 4);
}

TEST_F(OpenAiServer, MissingKeyIsAuthError) {
    Gateway gw(std::make_shared<OpenAiChatProvider>(base(), "CROSSLING_UNSET_KEY_VAR"), nullptr, fast());
    try {
        gw.complete(req("hi"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AuthError);
    }
}

}  // namespace
}  // namespace crossling::llm
