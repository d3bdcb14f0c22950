#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <thread>
#include <unistd.h>

#include "srel/client.hpp"
#include "srel/parse.hpp"

using namespace srel;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("srel-client-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

BackendConfig sim_config() {
    BackendConfig c;
    c.kind = BackendKind::Simulated;
    c.seed = 17;
    return c;
}

PromptText question_prompt(const MethodSpec& spec, const std::string& a,
                           const std::string& b) {
    const std::string q = "Is there " + a + " on the left of " + b +
                          " in the image?";
    return build_prompt(spec, q);
}

}  // namespace

TEST_CASE("token estimation rounds up quarter-size") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abc") == 1);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens(std::string(1000, 'x')) == 250);
}

TEST_CASE("request hash is stable and sensitive to every field") {
    BackendConfig c = sim_config();
    const std::string base = request_hash(c, "prompt", "img", 0);
    CHECK(base.size() == 32);
    CHECK(base == request_hash(c, "prompt", "img", 0));

    CHECK(base != request_hash(c, "prompt!", "img", 0));
    CHECK(base != request_hash(c, "prompt", "img2", 0));
    CHECK(base != request_hash(c, "prompt", "img", 1));

    BackendConfig c2 = c;
    c2.model = "other-model";
    CHECK(base != request_hash(c2, "prompt", "img", 0));
    c2 = c;
    c2.temperature = 0.5;
    CHECK(base != request_hash(c2, "prompt", "img", 0));
    c2 = c;
    c2.top_p = 0.5;
    CHECK(base != request_hash(c2, "prompt", "img", 0));
    c2 = c;
    c2.seed = 18;
    CHECK(base != request_hash(c2, "prompt", "img", 0));

    // retry/timeout/prices must not change the identity of a request
    c2 = c;
    c2.max_retries = 9;
    c2.timeout = std::chrono::milliseconds(1);
    c2.prices = {1.0, 2.0};
    CHECK(base == request_hash(c2, "prompt", "img", 0));
}

TEST_CASE("backend config validation") {
    CHECK_NOTHROW(sim_config().validate());
    BackendConfig bad = sim_config();
    bad.temperature = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sim_config();
    bad.max_retries = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sim_config();
    bad.kind = BackendKind::HttpChat;  // endpoint missing
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = sim_config();
    bad.error_model.eps_query = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("simulated backend answers from the scene record") {
    TempDir dir;
    BackendConfig c = sim_config();
    c.error_model = ErrorModel::zero();
    LvlmClient client(c);
    Scene scene = gen_scene(3, 4);
    client.scenes().put("img-1", scene);

    // ask about the true horizontal relation between the first two objects
    const auto& o1 = scene.objects[0];
    const auto& o2 = scene.objects[1];
    const bool left = o1.position.x < o2.position.x;
    const auto prompt = question_prompt(
        MethodSpec::vanilla(), left ? o1.label : o2.label,
        left ? o2.label : o1.label);
    const Exchange e = client.complete(prompt, "img-1");
    CHECK(e.response_text == "Yes");
    CHECK(e.tokens_estimated);
    CHECK(e.input_tokens == estimate_tokens(prompt.text));
    CHECK(e.attempt_count == 1);
    CHECK(!e.from_cache);

    // a structured method round-trips through the parser
    const auto prompt2 = question_prompt(MethodSpec::combined(), o1.label,
                                         o2.label);
    const Exchange e2 = client.complete(prompt2, "img-1");
    const auto parsed = parse_response(e2.response_text, MethodSpec::combined());
    CHECK(parsed.diagnostics.empty());
    CHECK(parsed.answer.has_value());

    CHECK_THROWS_AS(client.complete(prompt, "img-unknown"), ImageLoadError);

    // axis-ambiguous question phrases are rejected
    const auto vague = build_prompt(
        MethodSpec::vanilla(),
        "Is there " + o1.label + " at the same level as " + o2.label +
            " in the image?");
    CHECK_THROWS_AS(client.complete(vague, "img-1"), std::invalid_argument);
}

TEST_CASE("identical requests come back from the disk cache") {
    TempDir dir;
    BackendConfig c = sim_config();
    c.cache_root = (dir.path / "cache").string();
    LvlmClient client(c);
    client.scenes().put("img-1", gen_scene(3, 4));
    const auto& scene = client.scenes().get("img-1");
    const auto prompt = question_prompt(MethodSpec::vanilla(),
                                        scene.objects[0].label,
                                        scene.objects[1].label);

    const Exchange first = client.complete(prompt, "img-1", 5);
    CHECK(!first.from_cache);
    const Exchange second = client.complete(prompt, "img-1", 5);
    CHECK(second.from_cache);
    CHECK(second.response_text == first.response_text);
    CHECK(second.request_hash == first.request_hash);

    // a different trial salt is a different request
    const Exchange other = client.complete(prompt, "img-1", 6);
    CHECK(!other.from_cache);
    CHECK(other.request_hash != first.request_hash);

    // the cache file lives under {root}/{hash[0:2]}/{hash}.json
    const auto file = std::filesystem::path(c.cache_root) /
                      first.request_hash.substr(0, 2) /
                      (first.request_hash + ".json");
    CHECK(std::filesystem::exists(file));

    // a second client over the same cache root sees the entry
    LvlmClient again(c);
    again.scenes().put("img-1", client.scenes().get("img-1"));
    CHECK(again.complete(prompt, "img-1", 5).from_cache);
}

TEST_CASE("cost accounting per 100 questions") {
    CHECK(cost_of({}, {0.005, 0.015}).total_usd == 0.0);

    std::vector<Exchange> exchanges;
    for (int i = 0; i < 100; ++i) {
        Exchange e;
        e.input_tokens = 1000;
        e.output_tokens = 500;
        exchanges.push_back(e);
    }
    const CostReport r = cost_of(exchanges, {0.005, 0.015}, 100);
    // 100 * (1000 * 0.005 + 500 * 0.015) / 1000 = 1.25 dollars
    CHECK(r.total_usd == doctest::Approx(1.25));
    CHECK(r.per_100_questions_usd == doctest::Approx(1.25));
    CHECK(!r.tokens_estimated);

    exchanges[0].tokens_estimated = true;
    CHECK(cost_of(exchanges, {0.005, 0.015}, 100).tokens_estimated);

    // multiple calls per question raise the per-question cost
    const CostReport two_calls = cost_of(exchanges, {0.005, 0.015}, 50);
    CHECK(two_calls.per_100_questions_usd == doctest::Approx(2.5));
}

TEST_CASE("longer prompts cost strictly more per question") {
    TempDir dir;
    BackendConfig c = sim_config();
    c.prices = {0.005, 0.015};
    LvlmClient client(c);
    client.scenes().put("img-1", gen_scene(3, 4));
    const auto& scene = client.scenes().get("img-1");

    double prev = -1;
    for (const auto& spec : main_experiment_specs()) {
        const auto prompt = question_prompt(spec, scene.objects[0].label,
                                            scene.objects[1].label);
        const Exchange e = client.complete(prompt, "img-1");
        const double cost = cost_of({e}, c.prices, 1).per_100_questions_usd;
        CHECK_MESSAGE(cost > prev, "method " << spec.id());
        prev = cost;
    }
}

TEST_CASE("http backend retries transient failures and reports usage") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    const int n = ++hits;
                    if (n <= 2) {
                        res.status = 429;
                        res.set_content("slow down", "text/plain");
                        return;
                    }
                    const auto body = nlohmann::json::parse(req.body);
                    CHECK(body["model"] == "test-model");
                    CHECK(req.get_header_value("Authorization") ==
                          "Bearer sekrit");
                    const nlohmann::json reply = {
                        {"choices",
                         {{{"message", {{"role", "assistant"},
                                        {"content", "Answer: yes"}}}}}},
                        {"usage",
                         {{"prompt_tokens", 321}, {"completion_tokens", 12}}}};
                    res.set_content(reply.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("LVLM_API_KEY", "sekrit", 1);
    BackendConfig c;
    c.kind = BackendKind::HttpChat;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) +
                 "/v1/chat/completions";
    c.model = "test-model";
    c.max_retries = 3;
    c.backoff_base = std::chrono::milliseconds(1);
    LvlmClient client(c);

    const auto prompt = build_prompt(
        MethodSpec::vanilla(),
        "Is there a cat to the left of the dog in the image?");
    const Exchange e = client.complete(prompt, "http://images/1.png");
    CHECK(e.response_text == "Answer: yes");
    CHECK(e.attempt_count == 3);  // two 429s then success
    CHECK(e.input_tokens == 321);
    CHECK(e.output_tokens == 12);
    CHECK(!e.tokens_estimated);

    server.stop();
    th.join();
}

TEST_CASE("http backend surfaces permanent errors and missing usage") {
    httplib::Server server;
    server.Post("/bad", [](const httplib::Request&, httplib::Response& res) {
        res.status = 404;
        res.set_content("nope", "text/plain");
    });
    server.Post("/nousage",
                [](const httplib::Request&, httplib::Response& res) {
                    const nlohmann::json reply = {
                        {"choices",
                         {{{"message", {{"role", "assistant"},
                                        {"content", "No"}}}}}}};
                    res.set_content(reply.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    const auto prompt = build_prompt(
        MethodSpec::vanilla(),
        "Is there a cat to the left of the dog in the image?");

    BackendConfig c;
    c.kind = BackendKind::HttpChat;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/bad";
    c.max_retries = 0;
    LvlmClient bad(c);
    CHECK_THROWS_AS(bad.complete(prompt, "img"), ProviderError);
    try {
        bad.complete(prompt, "img");
    } catch (const ProviderError& err) {
        CHECK(err.status == 404);
        CHECK(err.body == "nope");
    }

    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/nousage";
    LvlmClient estimator(c);
    const Exchange e = estimator.complete(prompt, "img");
    CHECK(e.tokens_estimated);
    CHECK(e.output_tokens == estimate_tokens("No"));

    server.stop();
    th.join();

    // nothing listens here anymore: transport error after retries
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/bad";
    c.max_retries = 1;
    c.backoff_base = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(200);
    LvlmClient dead(c);
    CHECK_THROWS_AS(dead.complete(prompt, "img"), TransportError);
}
