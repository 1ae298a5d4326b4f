#pragma once

// HTTP API over a ProjectStore for the review front end.
//
//   GET  /api/project
//   GET  /api/queue?strategy=uncertainty|mean_entropy|min_margin&k=N
//   GET  /api/docs/{doc_id}
//   GET  /api/docs/{doc_id}/image
//   POST /api/docs/{doc_id}/actions
//   POST /api/iterations
//   GET  /api/labels

#include <memory>
#include <string>

namespace docseed {

class ProjectStore;

class ReviewServer {
 public:
  explicit ReviewServer(ProjectStore& store);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Throws Error when the address cannot be bound.
  void start(const std::string& host, int port);
  int port() const;
  void stop();
  // Blocks until stop() is called from another thread.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace docseed
