#include "stub_classifier.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>

namespace testing {

using nlohmann::json;

struct StubClassifier::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mutex;
  StubMode mode = StubMode::uniform;
  std::string last;
  int count = 0;
};

namespace {

json response_for(const json& req, StubMode mode) {
  json preds = json::array();
  for (const json& t : req.at("tokens")) {
    const std::string text = t.at("text").get<std::string>();
    json p = {{"i", t.at("i")}, {"label", "other"}, {"tag", "B"},
              {"confidence", {{"key", 0.25}, {"value", 0.25}, {"header", 0.25}, {"other", 0.25}}}};
    if (mode == StubMode::colon_keys) {
      const bool key = !text.empty() && text.back() == ':';
      p["label"] = key ? "key" : "value";
      p["confidence"] = {{"key", key ? 0.7 : 0.1}, {"value", key ? 0.1 : 0.7}, {"header", 0.1}, {"other", 0.1}};
    }
    preds.push_back(p);
  }
  std::string doc_id = req.at("doc_id").get<std::string>();
  if (!preds.empty()) {
    json& last = preds.back();
    switch (mode) {
      case StubMode::wrong_count: preds.erase(preds.size() - 1); break;
      case StubMode::duplicate_index: last["i"] = 0; break;
      case StubMode::out_of_range: last["i"] = static_cast<int>(preds.size()) + 5; break;
      case StubMode::bad_label: last["label"] = "question"; break;
      case StubMode::bad_tag: last["tag"] = "O"; break;
      case StubMode::bad_sum: last["confidence"]["key"] = 0.45; break;
      case StubMode::three_confidences: last["confidence"].erase("header"); break;
      case StubMode::label_not_argmax:
        last["label"] = "key";
        last["confidence"] = {{"key", 0.1}, {"value", 0.1}, {"header", 0.1}, {"other", 0.7}};
        break;
      case StubMode::wrong_doc_id: doc_id += "-other"; break;
      default: break;
    }
  }
  return {{"doc_id", doc_id}, {"predictions", preds}};
}

}  // namespace

StubClassifier::StubClassifier() : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res) {
    StubMode mode;
    {
      std::lock_guard lock(impl_->mutex);
      impl_->last = req.body;
      ++impl_->count;
      mode = impl_->mode;
    }
    if (mode == StubMode::http_500) {
      res.status = 500;
      res.set_content("{\"error\":\"model crashed\"}", "application/json");
      return;
    }
    if (mode == StubMode::malformed_json) {
      res.set_content("{\"doc_id\": ", "application/json");
      return;
    }
    json request;
    try {
      request = json::parse(req.body);
    } catch (const json::exception&) {
      res.status = 400;
      return;
    }
    res.set_content(response_for(request, mode).dump(), "application/json");
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StubClassifier::~StubClassifier() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void StubClassifier::set_mode(StubMode mode) {
  std::lock_guard lock(impl_->mutex);
  impl_->mode = mode;
}

int StubClassifier::port() const { return impl_->port; }

std::string StubClassifier::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

std::string StubClassifier::last_request() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->last;
}

int StubClassifier::requests() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->count;
}

}  // namespace testing
