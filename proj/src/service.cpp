#include "docseed/service.hpp"

#include <httplib.h>

#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "docseed/active_learning.hpp"
#include "docseed/error.hpp"
#include "docseed/json_io.hpp"
#include "docseed/store.hpp"

namespace docseed {

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

// Maps library errors onto HTTP statuses.
template <class Fn>
void guarded(httplib::Response& res, Fn fn) {
  try {
    fn();
  } catch (const NotFoundError& e) {
    send_error(res, 404, e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, e.what());
  } catch (const InvalidTransitionError& e) {
    send_error(res, 422, e.what());
  } catch (const FormatError& e) {
    send_error(res, 400, e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, std::string("malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

std::string content_type_for(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  return "application/octet-stream";
}

json queue(const ProjectStore& store, UncertaintyStrategy strategy, std::size_t k) {
  json items = json::array();
  for (const QueueItem& q : review_queue(store, strategy, k)) items.push_back({{"doc_id", q.doc_id}, {"score", q.score}});
  return {{"strategy", to_string(strategy)}, {"k", k}, {"items", items}};
}

}  // namespace

struct ReviewServer::Impl {
  ProjectStore& store;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool running = false;

  explicit Impl(ProjectStore& s) : store(s) {
    // httplib defaults to SO_REUSEPORT, which would let a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
    routes();
  }

  void routes() {
    server.Get("/api/project", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json iterations = json::array();
        for (const IterationManifest& m : store.iterations()) iterations.push_back(m);
        send_json(res, {{"schema", store.schema()},
                        {"schema_version", store.schema_version()},
                        {"config", config_to_json(store.config())},
                        {"documents", store.doc_ids().size()},
                        {"iterations", iterations}});
      });
    });

    server.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        UncertaintyStrategy strategy = store.config().strategy;
        if (req.has_param("strategy")) {
          const std::string name = req.get_param_value("strategy");
          if (name != "uncertainty") {
            auto parsed = parse_uncertainty_strategy(name);
            if (!parsed) throw FormatError("unknown strategy " + name);
            strategy = *parsed;
          }
        }
        std::size_t k = 10;
        if (req.has_param("k")) {
          const std::string raw = req.get_param_value("k");
          std::size_t used = 0;
          long value = 0;
          try {
            value = std::stol(raw, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != raw.size() || value < 1) throw FormatError("k must be a positive integer");
          k = static_cast<std::size_t>(value);
        }
        send_json(res, queue(store, strategy, k));
      });
    });

    server.Get(R"(/api/docs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const Document doc = store.document(id);
        const auto record = store.bootstrap_record(id);
        const AnnotationSet annotations = store.annotations(id);
        json image = nullptr;
        if (store.image_path(id)) image = "/api/docs/" + id + "/image";
        send_json(res, {{"doc_id", id},
                        {"page", {{"width", doc.page.width}, {"height", doc.page.height}}},
                        {"image_url", image},
                        {"tokens", doc.tokens},
                        {"entities", record ? json(record->entities) : json::array()},
                        {"links", record ? json(record->links) : json(nullptr)},
                        {"annotations", annotations.records},
                        {"complete", annotations.complete()},
                        {"schema_version", store.schema_version()}});
      });
    });

    server.Get(R"(/api/docs/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto path = store.image_path(id);
        if (!path) throw NotFoundError("document " + id + " has no page image");
        std::ifstream in(*path, std::ios::binary);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        res.set_content(bytes.str(), content_type_for(*path));
      });
    });

    server.Post(R"(/api/docs/([^/]+)/actions)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        if (!store.has_document(id)) throw NotFoundError("unknown document " + id);
        const json body = json::parse(req.body);
        if (body.is_object() && body.contains("action_id"))
          throw FormatError("action_id is assigned by the server");
        ReviewAction draft = body.get<ReviewAction>();
        if (!draft.doc_id.empty() && draft.doc_id != id) throw FormatError("doc_id does not match the URL");
        draft.doc_id = id;
        send_json(res, store.commit(std::move(draft)));
      });
    });

    server.Post("/api/iterations", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        try {
          send_json(res, export_iteration(store));
        } catch (const Error& e) {
          if (std::string(e.what()) == "empty iteration") return send_error(res, 409, e.what());
          throw;
        }
      });
    });

    server.Get("/api/labels", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, store.schema()); });
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "no such endpoint" : "request failed");
    });
  }
};

ReviewServer::ReviewServer(ProjectStore& store) : impl_(std::make_unique<Impl>(store)) {}

ReviewServer::~ReviewServer() { stop(); }

void ReviewServer::start(const std::string& host, int port) {
  std::lock_guard lock(impl_->mutex);
  if (impl_->running) throw Error("server already running");
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port <= 0) throw Error("cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    impl_->port = port;
  }
  impl_->running = true;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

int ReviewServer::port() const { return impl_->port; }

void ReviewServer::stop() {
  std::unique_lock lock(impl_->mutex);
  if (!impl_->running) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->running = false;
  impl_->stopped_cv.notify_all();
}

void ReviewServer::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return !impl_->running; });
}

}  // namespace docseed
