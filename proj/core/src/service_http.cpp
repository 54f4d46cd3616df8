#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "vocal/error.hpp"
#include "vocal/service.hpp"

namespace vocal {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { dispatch(req, res); };
    server.Get(R"(/.*)", handler);
    server.Post(R"(/.*)", handler);
    server.Put(R"(/.*)", handler);
    server.Delete(R"(/.*)", handler);
  }

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      request.headers.emplace(std::move(key), v);
    }
    if (req.is_multipart_form_data()) {
      for (const auto& [name, file] : req.files)
        request.parts.push_back({file.name, file.filename, file.content_type, file.content});
    } else {
      request.body = req.body;
    }
    const HttpResponse response = service.handle(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Storage, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorCode::Storage, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace vocal
