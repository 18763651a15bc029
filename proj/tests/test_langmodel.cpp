#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "limerick/langmodel.hpp"
#include "test_util.hpp"

using namespace limerick;
using limerick::testing::data_path;

namespace {

NgramModel model_from_string(const std::string& corpus, int order,
                             double alpha) {
  std::istringstream in(corpus);
  return train_ngram(in, order, alpha);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("uniform smoothing over an empty-count vocabulary") {
  NgramModel model(1, 1.0, {"a", "b", "c", "d"});
  auto dist = model.next_distribution({});
  REQUIRE(dist.support.size() == 4);
  for (const auto& [word, p] : dist.support)
    CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("bigram counts concentrate as alpha vanishes") {
  auto model = model_from_string("a b a b\n", 2, 1e-12);
  CHECK(model.next_distribution({"a"}).prob("b") == doctest::Approx(1.0));
  // Context beyond order-1 is ignored (Markov property).
  auto longer = model.next_distribution({"b", "b", "a"});
  CHECK(longer.support == model.next_distribution({"a"}).support);
}

TEST_CASE("training pads sentence starts") {
  auto model = model_from_string("a b\n", 2, 1.0);
  CHECK(model.count({}, "a") == 1);  // <s> -> a
  CHECK(model.count({"a"}, "b") == 1);
  CHECK(model.count({"b"}, "a") == 0);  // no wraparound, no end event
  CHECK(model.vocabulary() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("order-1 models ignore context entirely") {
  auto model = model_from_string("a b b\n", 1, 0.5);
  CHECK(model.next_distribution({}).support ==
        model.next_distribution({"a", "b"}).support);
}

TEST_CASE("invalid training parameters are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(train_ngram(empty, 2, 1.0), LoadError);
  std::istringstream ok("a b\n");
  CHECK_THROWS_AS(train_ngram(ok, 2, 0.0), ContractViolation);
  std::istringstream ok2("a b\n");
  CHECK_THROWS_AS(train_ngram(ok2, 0, 1.0), ContractViolation);
}

TEST_CASE("score_line is the mean per-token log probability") {
  SUBCASE("uniform model over 4 words") {
    NgramModel model(1, 1.0, {"a", "b", "c", "d"});
    double score = score_line(model, {"a", "b", "c"});
    CHECK(score == doctest::Approx(std::log(0.25)));
  }
  SUBCASE("certain token scores zero") {
    auto model = model_from_string("a a a\n", 1, 1e-12);
    CHECK(score_line(model, {"a"}) == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("smoothed bigram hand value, |V| = {a, b}") {
    auto model = model_from_string("a b\n", 2, 1.0);
    // P(b|a) = (1+1)/(1+2) = 2/3.
    CHECK(score_line(model, {"b"}, {"a"}) ==
          doctest::Approx(std::log(2.0 / 3.0)));
  }
  SUBCASE("out-of-vocabulary token is -inf and the line is discarded") {
    auto model = model_from_string("a b\n", 2, 1.0);
    CHECK(score_line(model, {"zzz"}, {"a"}) == -kInf);
  }
  SUBCASE("empty line is a contract violation") {
    auto model = model_from_string("a b\n", 2, 1.0);
    CHECK_THROWS_AS(score_line(model, {}), ContractViolation);
  }
}

TEST_CASE("next_distribution sums to one over the vocabulary") {
  auto model = model_from_string(
      "the cat sat on the mat\nthe dog ate the bone\ncat and dog ran\n", 2,
      0.25);
  std::mt19937_64 rng(11);
  std::vector<std::string> vocab = model.vocabulary();
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::string> context;
    for (std::size_t k = 0; k < rng() % 3; ++k)
      context.push_back(vocab[rng() % vocab.size()]);
    auto dist = model.next_distribution(context);
    CHECK(dist.total_mass() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("scoring a concatenation equals the length-weighted mean of parts") {
  auto model = model_from_string(
      "the cat sat on the mat\nthe dog ate the bone\n", 2, 0.5);
  std::vector<std::string> first = {"the", "cat"};
  std::vector<std::string> second = {"sat", "on", "the"};
  std::vector<std::string> whole = {"the", "cat", "sat", "on", "the"};
  double score_first = score_line(model, first);
  double score_second = score_line(model, second, first);
  double score_whole = score_line(model, whole);
  double expected = (score_first * 2 + score_second * 3) / 5.0;
  CHECK(score_whole == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("identical inputs give identical distributions") {
  auto model = model_from_string("a b c a b\n", 2, 0.3);
  auto d1 = model.next_distribution({"a"});
  auto d2 = model.next_distribution({"a"});
  CHECK(d1.support == d2.support);
}

TEST_CASE("held-out fixture lines outscore their shuffles on average") {
  auto split = limerick::testing::split_fixture_corpus();
  REQUIRE(split.held_out.size() >= 10);
  auto model = model_from_string(split.train_text, 2, 0.1);
  for (const auto& words : split.held_out)
    for (const auto& word : words) REQUIRE(model.in_vocabulary(word));

  std::mt19937_64 rng(555);
  double true_sum = 0.0, shuffled_sum = 0.0;
  int samples = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& words = split.held_out[rng() % split.held_out.size()];
    std::vector<std::string> shuffled = words;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng() % i]);
    true_sum += score_line(model, words);
    shuffled_sum += score_line(model, shuffled);
    ++samples;
  }
  CHECK(samples == 100);
  CHECK(true_sum / samples > shuffled_sum / samples);
}

TEST_CASE("model persistence round-trips") {
  auto model = model_from_string("a b c a b\nb c a\n", 2, 0.7);
  std::stringstream buffer;
  model.save(buffer);
  auto reloaded = NgramModel::load(buffer);
  CHECK(reloaded.order() == model.order());
  CHECK(reloaded.alpha() == model.alpha());
  CHECK(reloaded.vocabulary() == model.vocabulary());
  auto d1 = model.next_distribution({"b"});
  auto d2 = reloaded.next_distribution({"b"});
  REQUIRE(d1.support.size() == d2.support.size());
  for (std::size_t i = 0; i < d1.support.size(); ++i) {
    CHECK(d1.support[i].first == d2.support[i].first);
    CHECK(d1.support[i].second == doctest::Approx(d2.support[i].second));
  }
}

// ---------------------------------------------------------------------------
// Remote scoring backend
// ---------------------------------------------------------------------------

namespace {

/// Minimal scoring server for the wire-protocol tests.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&,
                                         httplib::Response&)> handler) {
    server_.Post("/v1/distribution", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  RemoteEndpointConfig config(int top_k = 5) const {
    RemoteEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg.timeout_ms = 2000;
    cfg.top_k = top_k;
    return cfg;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("remote distribution renormalizes the returned support") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    CHECK(body.contains("context"));
    CHECK(body.contains("top_k"));
    nlohmann::json out;
    out["tokens"] = nlohmann::json::array();
    out["tokens"].push_back({{"token", "cat"}, {"logprob", -1.0}});
    res.set_content(out.dump(), "application/json");
  });
  auto dist = remote_next_distribution(server.config(), {"the"});
  REQUIRE(dist.support.size() == 1);
  CHECK(dist.support[0].first == "cat");
  CHECK(dist.support[0].second == doctest::Approx(1.0));
  CHECK(dist.truncated);
}

TEST_CASE("remote distribution splits equal logprobs evenly") {
  StubServer server([](const httplib::Request&, httplib::Response& res) {
    nlohmann::json out;
    out["tokens"] = {{{"token", "cat"}, {"logprob", -1.0}},
                     {{"token", "dog"}, {"logprob", -1.0}}};
    res.set_content(out.dump(), "application/json");
  });
  auto dist = remote_next_distribution(server.config(), {});
  REQUIRE(dist.support.size() == 2);
  CHECK(dist.support[0].second == doctest::Approx(0.5));
  CHECK(dist.support[1].second == doctest::Approx(0.5));
}

TEST_CASE("remote requests are isolated under concurrency") {
  StubServer server([](const httplib::Request& req, httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    // Echo a token derived from the context so responses are distinguishable.
    std::string tag = body["context"].empty()
                          ? "root"
                          : body["context"].back().get<std::string>();
    nlohmann::json out;
    out["tokens"] = {{{"token", tag}, {"logprob", -1.0}}};
    res.set_content(out.dump(), "application/json");
  });
  auto cfg = server.config();
  std::atomic<int> mismatches{0};
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      std::string word = "w" + std::to_string(t);
      for (int i = 0; i < 25; ++i) {
        auto dist = remote_next_distribution(cfg, {word});
        if (dist.support.size() != 1 || dist.support[0].first != word)
          ++mismatches;
      }
    });
  }
  for (auto& worker : workers) worker.join();
  CHECK(mismatches == 0);
}

TEST_CASE("remote failures raise scoring-backend errors") {
  SUBCASE("empty token list") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"tokens": []})", "application/json");
    });
    CHECK_THROWS_AS(remote_next_distribution(server.config(), {}),
                    ScoringBackendError);
  }
  SUBCASE("schema violation") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"tokens": [{"token": 3}]})", "application/json");
    });
    CHECK_THROWS_AS(remote_next_distribution(server.config(), {}),
                    ScoringBackendError);
  }
  SUBCASE("non-2xx status") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("boom", "text/plain");
    });
    CHECK_THROWS_AS(remote_next_distribution(server.config(), {}),
                    ScoringBackendError);
  }
  SUBCASE("unreachable endpoint") {
    RemoteEndpointConfig cfg;
    cfg.base_url = "http://127.0.0.1:1";  // nothing listens here
    cfg.timeout_ms = 200;
    cfg.top_k = 3;
    CHECK_THROWS_AS(remote_next_distribution(cfg, {}), ScoringBackendError);
  }
}
