#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "splitstreams/cli.hpp"
#include "splitstreams/service.hpp"
#include "support/generators.hpp"

using namespace splitstreams;
using nlohmann::json;

namespace {

const char* kThreeChildren = R"({"timesteps":[{"nodes":[{"id":"P","value":10},
  {"id":"a","parent":"P","value":1},{"id":"b","parent":"P","value":2},{"id":"c","parent":"P","value":3}]}]})";

const char* kChain = R"({"timesteps":[
  {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"},{"id":"C","parent":"B"}]},
  {"nodes":[{"id":"R"},{"id":"A","parent":"R"},{"id":"B","parent":"A"},{"id":"C","parent":"B"}]}]})";

std::string body(const std::string& dataset, const json& params = json()) {
  json j = {{"dataset", json::parse(dataset)}};
  if (!params.is_null()) j["params"] = params;
  return j.dump();
}

}  // namespace

TEST(Handlers, Health) {
  auto r = service::handle_health();
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["status"], "ok");
}

TEST(Handlers, RenderReturnsSvg) {
  auto r = service::handle_render(body(kChain));
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.contentType, "image/svg+xml");
  EXPECT_EQ(r.body.rfind("<?xml", 0), 0u);
  EXPECT_NE(r.body.find("<path id=\"stream-"), std::string::npos);
}

TEST(Handlers, DatasetMayBeText) {
  json j = {{"dataset", std::string(kChain)}};
  EXPECT_EQ(service::handle_render(j.dump()).body, service::handle_render(body(kChain)).body);
}

TEST(Handlers, LayoutShowsPositions) {
  auto r = service::handle_layout(body(kThreeChildren));
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  const auto& nodes = j["timesteps"][0]["nodes"];
  std::vector<double> pos;
  for (const auto& n : nodes)
    if (n["parent"] == "P") pos.push_back(n["pos"].get<double>());
  EXPECT_EQ(pos, (std::vector<double>{1, 3, 6}));
}

TEST(Handlers, ErrorStatuses) {
  auto neg = service::handle_render(body(R"({"timesteps":[{"nodes":[{"id":"R"},{"id":"K","parent":"R","value":-3}]}]})"));
  EXPECT_EQ(neg.status, 400);
  EXPECT_EQ(json::parse(neg.body)["error"], "structure");
  EXPECT_EQ(json::parse(neg.body)["node"], "K");

  auto syntax = service::handle_render("{\"dataset\": ");
  EXPECT_EQ(syntax.status, 400);
  EXPECT_EQ(json::parse(syntax.body)["error"], "parse");

  json text = {{"dataset", "{\n\"timesteps\": [\n}"}};
  auto located = json::parse(service::handle_layout(text.dump()).body);
  EXPECT_EQ(located["line"], 3);

  auto link = service::handle_render(body(R"({"timesteps":[{"nodes":[{"id":"A","next":["Q"]}]},{"nodes":[{"id":"B"}]}]})"));
  EXPECT_EQ(link.status, 400);
  EXPECT_EQ(json::parse(link.body)["error"], "link");

  auto config = service::handle_render(body(kChain, {{"hcr", 2}}));
  EXPECT_EQ(config.status, 400);
  EXPECT_EQ(json::parse(config.body)["error"], "config");

  auto strict = service::handle_render(body(kChain, {{"hcr", 0.2}, {"marginValue", 5}, {"gap", 100}, {"strict", true}}));
  EXPECT_EQ(strict.status, 422);
  auto v = json::parse(strict.body)["violations"];
  ASSERT_FALSE(v.empty());
  EXPECT_DOUBLE_EQ(v[0]["deficit"].get<double>(), 10.0);
}

TEST(Handlers, HcrOneHasNoCurves) {
  auto r = service::handle_render(body(kChain, {{"hcr", 1.0}, {"marginValue", 0}}));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body.find(" C"), std::string::npos);
}

TEST(Handlers, StatelessUnderShuffledReplay) {
  gen::Rng rng(61);
  gen::ForestOptions opt;
  std::vector<std::string> requests;
  for (int i = 0; i < 40; ++i) {
    requests.push_back(body(gen::to_text(gen::random_forest(rng, opt)),
                            {{"hcr", 0.1 + 0.02 * i}, {"marginValue", static_cast<double>(i % 4)}}));
  }
  requests.push_back(body(kChain, {{"strict", true}, {"hcr", 0.2}, {"marginValue", 5}}));
  std::vector<std::string> first;
  for (const auto& r : requests) first.push_back(service::handle_render(r).body + service::handle_layout(r).body);
  std::vector<std::size_t> order(requests.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int round = 0; round < 3; ++round) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order)
      ASSERT_EQ(service::handle_render(requests[i]).body + service::handle_layout(requests[i]).body, first[i]);
  }
}

TEST(Handlers, MatchesCommandLineOutput) {
  const auto dir = std::filesystem::temp_directory_path() / "splitstreams_service_test";
  std::filesystem::create_directories(dir);
  const auto file = (dir / "chain.json").string();
  std::ofstream(file) << kChain;
  std::ostringstream out, err;
  const char* argv[] = {"splitstreams", "-i", file.c_str(), "--hcr", "0.7", "--margin", "hierarchical",
                        "--margin-value", "3", "--palette", "greens"};
  ASSERT_EQ(cli::run(11, argv, out, err), 0) << err.str();
  auto svc = service::handle_render(body(kChain, {{"hcr", 0.7}, {"margin", "hierarchical"}, {"marginValue", 3}, {"palette", "greens"}}));
  EXPECT_EQ(out.str(), svc.body);
  std::filesystem::remove_all(dir);
}

TEST(Server, LoopbackRoundTrip) {
  service::Server server;
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  const auto req = body(kChain);
  auto render = client.Post("/render", req, "application/json");
  ASSERT_TRUE(render);
  EXPECT_EQ(render->status, 200);
  EXPECT_EQ(render->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(render->body, service::handle_render(req).body);

  auto layout = client.Post("/layout", body(kThreeChildren), "application/json");
  ASSERT_TRUE(layout);
  EXPECT_EQ(layout->status, 200);

  auto bad = client.Post("/render", body(kChain, {{"strict", true}, {"hcr", 0.2}, {"marginValue", 5}, {"gap", 100}}),
                         "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 422);

  auto missing = client.Get("/render");
  ASSERT_TRUE(missing);
  EXPECT_NE(missing->status, 200);

  server.stop();
  t.join();
}
