#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <mutex>
#include <thread>

#include "sqlsel/error.hpp"
#include "sqlsel/judge.hpp"
#include "support/fixtures.hpp"

namespace sqlsel {
namespace {

using json = nlohmann::json;

// Local chat-completion endpoint; replies with `script` entries in order,
// repeating the last one.
class FakeEndpoint {
 public:
  struct Reply {
    int status;
    std::string body;
  };

  explicit FakeEndpoint(std::vector<Reply> script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(req.body);
      auth_.push_back(req.get_header_value("Authorization"));
      const auto& r = script_[std::min(calls_, script_.size() - 1)];
      ++calls_;
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::size_t calls() {
    std::lock_guard lock(mu_);
    return calls_;
  }
  json body(std::size_t i) {
    std::lock_guard lock(mu_);
    return json::parse(bodies_.at(i));
  }
  std::string auth(std::size_t i) {
    std::lock_guard lock(mu_);
    return auth_.at(i);
  }

 private:
  httplib::Server server_;
  std::vector<Reply> script_;
  std::mutex mu_;
  std::size_t calls_ = 0;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
  int port_ = 0;
  std::thread thread_;
};

std::string completion(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

JudgmentRequest request() {
  JudgmentRequest req;
  req.question_id = "q";
  req.question = "How many?";
  req.side_a = {0, "SELECT 1", testing::scalar(1)};
  req.side_b = {1, "SELECT 2", testing::scalar(2)};
  return req;
}

RemoteJudgeConfig config(const std::string& url) {
  RemoteJudgeConfig c;
  c.base_url = url;
  c.model = "judge-7b";
  c.max_tokens = 512;
  c.retries = 2;
  c.request_timeout = std::chrono::milliseconds(5000);
  return c;
}

TEST(RemoteJudge, WireFormat) {
  FakeEndpoint ep({{200, completion("<think>r</think><answer>B</answer>")}});
  auto cfg = config(ep.url());
  cfg.api_token = "secret";
  RemoteJudge judge(cfg);
  const auto req = request();
  const auto out = judge.judge(req);
  EXPECT_EQ(out.winner, Verdict::B);
  EXPECT_TRUE(out.format_ok);
  EXPECT_EQ(out.reasoning_text, std::optional<std::string>("r"));
  EXPECT_EQ(out.backend_tag, "remote:judge-7b");
  ASSERT_EQ(ep.calls(), 1u);
  const auto body = ep.body(0);
  EXPECT_EQ(body["model"], "judge-7b");
  EXPECT_EQ(body["temperature"], 0);
  EXPECT_EQ(body["n"], 1);
  EXPECT_EQ(body["max_tokens"], 512);
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], render_prompt(req));
  EXPECT_EQ(ep.auth(0), "Bearer secret");
}

TEST(RemoteJudge, NoTokenNoHeader) {
  FakeEndpoint ep({{200, completion("<answer>A</answer>")}});
  RemoteJudge judge(config(ep.url()));
  const auto out = judge.judge(request());
  EXPECT_EQ(out.winner, Verdict::A);
  EXPECT_FALSE(out.format_ok);
  EXPECT_EQ(ep.auth(0), "");
}

TEST(RemoteJudge, RetriesServerErrors) {
  FakeEndpoint ep({{503, "busy"}, {429, "slow down"}, {200, completion("<think>x</think><answer>A</answer>")}});
  RemoteJudge judge(config(ep.url()));
  EXPECT_EQ(judge.judge(request()).winner, Verdict::A);
  EXPECT_EQ(ep.calls(), 3u);
}

TEST(RemoteJudge, ExhaustedRetriesIsTransportError) {
  FakeEndpoint ep({{500, "down"}});
  RemoteJudge judge(config(ep.url()));
  EXPECT_THROW(judge.judge(request()), TransportError);
  EXPECT_EQ(ep.calls(), 3u);
}

TEST(RemoteJudge, ClientErrorNotRetried) {
  FakeEndpoint ep({{400, "bad"}});
  RemoteJudge judge(config(ep.url()));
  EXPECT_THROW(judge.judge(request()), TransportError);
  EXPECT_EQ(ep.calls(), 1u);
}

TEST(RemoteJudge, MalformedBody) {
  FakeEndpoint ep({{200, "{\"choices\": []}"}});
  RemoteJudge judge(config(ep.url()));
  EXPECT_THROW(judge.judge(request()), TransportError);
}

TEST(RemoteJudge, UnreachableHost) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  auto cfg = config("http://127.0.0.1:" + std::to_string(port) + "/v1");
  cfg.retries = 1;
  RemoteJudge judge(cfg);
  EXPECT_THROW(judge.judge(request()), TransportError);
}

TEST(RemoteJudge, UnparseableReplyIsParseFailureNotError) {
  FakeEndpoint ep({{200, completion("I pick A")}});
  RemoteJudge judge(config(ep.url()));
  EXPECT_EQ(judge.judge(request()).winner, Verdict::parse_failure);
}

TEST(RemoteJudge, BadConfig) {
  EXPECT_THROW(RemoteJudge(config("localhost:8000")), ConfigError);
  auto cfg = config("http://localhost:1/v1");
  cfg.model = "";
  EXPECT_THROW(RemoteJudge{cfg}, ConfigError);
}

TEST(RemoteJudge, CachedRemoteCallsOnce) {
  FakeEndpoint ep({{200, completion("<think>x</think><answer>B</answer>")}});
  CachedJudge judge(std::make_shared<RemoteJudge>(config(ep.url())));
  judge.judge(request());
  judge.judge(request());
  EXPECT_EQ(ep.calls(), 1u);
}

}  // namespace
}  // namespace sqlsel
