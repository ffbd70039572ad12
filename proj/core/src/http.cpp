#include "prefcon/error.hpp"
#include "prefcon/session.hpp"

#include <httplib.h>

#include <vector>

namespace prefcon {
namespace {

std::vector<std::string> segments(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto j = path.find('/', i);
    const auto end = j == std::string_view::npos ? path.size() : j;
    if (end > i) out.emplace_back(path.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

nlohmann::json error_body(std::string_view code, const std::string& message, const nlohmann::json& detail = nullptr) {
  return {{"error", {{"code", code}, {"message", message}, {"detail", detail}}}};
}

HttpResponse route(SessionStore& store, std::string_view method, const std::vector<std::string>& seg,
                   std::string_view body) {
  const auto parsed = [&] { return body.empty() ? nlohmann::json::object() : nlohmann::json::parse(body); };
  const bool get = method == "GET", post = method == "POST";
  const auto not_allowed = [] { return HttpResponse{405, error_body("METHOD_NOT_ALLOWED", "method not allowed")}; };

  if (seg.empty() || seg[0] != "sessions" || seg.size() > 3)
    return {404, error_body(to_string(Errc::not_found), "no such route")};
  if (seg.size() == 1) {
    if (post) return {201, summary_json(*store.create(parsed()))};
    if (get) return {200, {{"sessions", store.ids()}}};
    return not_allowed();
  }
  const std::string& id = seg[1];
  if (seg.size() == 2) {
    if (!get) return not_allowed();
    return {200, summary_json(*store.get(id))};
  }
  const std::string& action = seg[2];
  if (action == "contract") {
    if (!post) return not_allowed();
    return {200, store.contract(id, parsed())};
  }
  if (action == "undo") {
    if (!post) return not_allowed();
    return {200, summary_json(*store.undo(id))};
  }
  if (action == "winnow") {
    if (!get) return not_allowed();
    const auto s = store.get(id);
    return {200, {{"id", id}, {"winnow", s->winnow().keys()}, {"rows", to_json(s->winnow()).at("rows")}}};
  }
  if (action == "export") {
    if (!get) return not_allowed();
    return {200, export_json(*store.get(id))};
  }
  return {404, error_body(to_string(Errc::not_found), "no such route")};
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::protection_conflict:
    case Errc::nothing_to_undo:
    case Errc::duplicate_session: return 409;
    case Errc::not_finitely_stratifiable:
    case Errc::iteration_cap:
    case Errc::resource_limit:
    case Errc::oracle_too_large: return 422;
    case Errc::not_found: return 404;
    case Errc::io_error: return 500;
    default: return 400;
  }
}

HttpResponse handle_request(SessionStore& store, std::string_view method, std::string_view path,
                            std::string_view body) {
  try {
    return route(store, method, segments(path), body);
  } catch (const Error& e) {
    return {http_status(e.code()), error_body(to_string(e.code()), e.what(), e.detail())};
  } catch (const nlohmann::json::exception& e) {
    return {400, error_body(to_string(Errc::parse_error), e.what())};
  } catch (const std::exception& e) {
    return {500, error_body("INTERNAL", e.what())};
  }
}

struct HttpService::Impl {
  SessionStore& store;
  httplib::Server server;
};

HttpService::HttpService(SessionStore& store) : impl_(new Impl{store, {}}) {
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle_request(impl_->store, req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error(Errc::io_error, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

}  // namespace prefcon
