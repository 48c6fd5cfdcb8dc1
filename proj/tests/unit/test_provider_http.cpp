#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "carserver/error.hpp"
#include "carserver/promptkit.hpp"

using namespace carserver;
using namespace carserver::promptkit;

namespace {

constexpr const char* kKeyVar = "CARSERVER_HTTP_TEST_KEY";

// Local chat endpoint that records what it receives.
class FakeChat {
 public:
  FakeChat() {
    server_.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard<std::mutex> lock(mu_);
        body_ = req.body;
        auth_ = req.get_header_value("Authorization");
        content_type_ = req.get_header_value("Content-Type");
      }
      ++hits_;
      if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
      res.status = status_;
      res.set_content(reply_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    setenv(kKeyVar, "sk-test", 1);
  }
  ~FakeChat() {
    server_.stop();
    thread_.join();
    unsetenv(kKeyVar);
  }

  ProviderConfig config() const {
    ProviderConfig c;
    c.kind = ProviderKind::HttpChat;
    c.endpointUrl = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat";
    c.apiKeyEnvVar = kKeyVar;
    c.model = "test-model";
    c.tokenLimit = 50;
    c.timeout = std::chrono::milliseconds(2000);
    return c;
  }

  static std::string reply_with(const std::string& content, int tokens = -1) {
    nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    if (tokens >= 0) j["usage"] = {{"completion_tokens", tokens}};
    return j.dump();
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::string body_, auth_, content_type_;
  std::atomic<int> hits_{0};
  int status_ = 200;
  std::string reply_ = reply_with("hello there");
  std::chrono::milliseconds delay_{0};
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST(HttpProvider, SendsChatRequest) {
  FakeChat chat;
  const auto r = execute_prompt("Generate things", chat.config());
  EXPECT_EQ(r.raw, "hello there");
  EXPECT_EQ(r.tokensUsed, 2);
  EXPECT_EQ(chat.auth_, "Bearer sk-test");
  EXPECT_EQ(chat.content_type_, "application/json");
  const auto body = nlohmann::json::parse(chat.body_);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["max_tokens"], 50);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], "Generate things");
}

TEST(HttpProvider, UsageOverridesTokenCount) {
  FakeChat chat;
  chat.reply_ = FakeChat::reply_with("a b c", 7);
  EXPECT_EQ(execute_prompt("p", chat.config()).tokensUsed, 7);
  chat.reply_ = FakeChat::reply_with("a b c", 51);
  EXPECT_EQ(code_of([&] { execute_prompt("p", chat.config()); }), ErrorCode::ProviderResponse);
}

TEST(HttpProvider, StatusAndBodyErrors) {
  FakeChat chat;
  chat.status_ = 500;
  EXPECT_EQ(code_of([&] { execute_prompt("p", chat.config()); }), ErrorCode::ProviderStatus);
  chat.status_ = 200;
  chat.reply_ = "not json";
  EXPECT_EQ(code_of([&] { execute_prompt("p", chat.config()); }), ErrorCode::ProviderResponse);
  chat.reply_ = R"({"choices": []})";
  EXPECT_EQ(code_of([&] { execute_prompt("p", chat.config()); }), ErrorCode::ProviderResponse);
}

TEST(HttpProvider, TimeoutWithRetries) {
  FakeChat chat;
  chat.delay_ = std::chrono::milliseconds(600);
  auto c = chat.config();
  c.timeout = std::chrono::milliseconds(200);
  c.maxRetries = 1;
  EXPECT_EQ(code_of([&] { execute_prompt("p", c); }), ErrorCode::ProviderTimeout);
  EXPECT_EQ(chat.hits_.load(), 2);
}

TEST(HttpProvider, RetriesAreClamped) {
  FakeChat chat;
  chat.delay_ = std::chrono::milliseconds(400);
  auto c = chat.config();
  c.timeout = std::chrono::milliseconds(150);
  c.maxRetries = 10;
  EXPECT_EQ(code_of([&] { execute_prompt("p", c); }), ErrorCode::ProviderTimeout);
  EXPECT_EQ(chat.hits_.load(), 3);
}

TEST(HttpProvider, BadEndpointUrl) {
  FakeChat chat;
  auto c = chat.config();
  c.endpointUrl = "ftp://example.org/chat";
  EXPECT_EQ(code_of([&] { execute_prompt("p", c); }), ErrorCode::InvalidConfig);
}
