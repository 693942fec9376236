#pragma once

#include <string>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "splitstreams/error.hpp"
#include "splitstreams/pipeline.hpp"

namespace splitstreams::service {

struct Response {
  int status = 200;
  std::string contentType = "text/plain";
  std::string body;
};

namespace detail {

inline Response error_response(int status, const std::string& kind, const std::string& message,
                               nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  return {status, "application/json", extra.dump()};
}

struct Request {
  std::string dataset;
  Params params;
};

inline Request parse_request(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("request body: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("request body must be an object");
  auto ds = j.find("dataset");
  if (ds == j.end()) throw ParseError("request body: missing 'dataset'");
  Request r;
  // the dataset may come inline or as document text
  r.dataset = ds->is_string() ? ds->get<std::string>() : ds->dump();
  if (auto p = j.find("params"); p != j.end()) r.params = params_from_json(*p);
  return r;
}

template <typename F>
Response guarded(std::string_view body, F&& f) {
  try {
    return f(parse_request(body));
  } catch (const InfeasibleError& e) {
    return error_response(422, "infeasible", e.what(), {{"violations", violations_json(e.violations())}});
  } catch (const ParseError& e) {
    nlohmann::json extra = nlohmann::json::object();
    if (e.line() > 0) extra = {{"line", e.line()}, {"column", e.column()}};
    return error_response(400, "parse", e.what(), extra);
  } catch (const StructureError& e) {
    return error_response(400, "structure", e.what(), {{"node", e.node()}});
  } catch (const LinkError& e) {
    return error_response(400, "link", e.what());
  } catch (const ConfigError& e) {
    return error_response(400, "config", e.what());
  }
}

}  // namespace detail

/// POST /render: {dataset, params} to SVG text.
inline Response handle_render(std::string_view body) {
  return detail::guarded(body, [](const detail::Request& req) {
    Response r{200, "image/svg+xml", {}};
    r.body = render_dataset(req.dataset, req.params);
    return r;
  });
}

/// POST /layout: {dataset, params} to the computed frames.
inline Response handle_layout(std::string_view body) {
  return detail::guarded(body, [](const detail::Request& req) {
    auto result = generate(load_dataset(req.dataset), req.params);
    return Response{200, "application/json", layout_json(result).dump()};
  });
}

inline Response handle_health() { return {200, "application/json", R"({"status":"ok"})"}; }

/// Local HTTP front end over the handlers. Requests share no state.
class Server {
 public:
  Server() {
    auto reply = [](httplib::Response& res, const Response& r) {
      res.status = r.status;
      res.set_content(r.body, r.contentType);
    };
    http_.Post("/render", [reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, handle_render(req.body));
    });
    http_.Post("/layout", [reply](const httplib::Request& req, httplib::Response& res) {
      reply(res, handle_layout(req.body));
    });
    http_.Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
      reply(res, handle_health());
    });
  }

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return http_.bind_to_any_port(host);
    return http_.bind_to_port(host, port) ? port : -1;
  }

  bool listen() { return http_.listen_after_bind(); }
  void stop() { http_.stop(); }
  void wait_until_ready() { http_.wait_until_ready(); }

 private:
  httplib::Server http_;
};

}  // namespace splitstreams::service
