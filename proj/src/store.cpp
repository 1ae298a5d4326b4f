#include "docseed/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "docseed/error.hpp"
#include "docseed/json_io.hpp"

namespace docseed {

namespace fs = std::filesystem;

namespace {

constexpr int kStoreFormat = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void fsync_fd(int fd, const fs::path& path) {
  if (::fsync(fd) != 0) throw Error("fsync failed for " + path.string());
}

// Write to a sibling temp file, fsync, rename over the target.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error("cannot write " + tmp.string());
  std::size_t done = 0;
  while (done < content.size()) {
    const ssize_t n = ::write(fd, content.data() + done, content.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error("short write to " + tmp.string());
    }
    done += static_cast<std::size_t>(n);
  }
  fsync_fd(fd, tmp);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot replace " + path.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
  write_atomic(path, j.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
}

void append_line(const fs::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw Error("cannot open " + path.string());
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error("short append to " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  fsync_fd(fd, path);
  ::close(fd);
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  const std::size_t len = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + len, sizeof buf - len, ".%03dZ", static_cast<int>(ms));
  return buf;
}

void check_doc_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 200 && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                           c == '-' || c == '.';
                  });
  if (!ok) throw FormatError("document id \"" + id + "\" must use [A-Za-z0-9._-] and not start with '.'");
}

struct DocSlot {
  std::mutex write;          // serializes mutations of this document
  mutable std::mutex snap;   // guards only the pointer swap below
  std::shared_ptr<const AnnotationSet> current = std::make_shared<const AnnotationSet>();

  std::shared_ptr<const AnnotationSet> snapshot() const {
    std::lock_guard lock(snap);
    return current;
  }
  void publish(AnnotationSet next) {
    auto ptr = std::make_shared<const AnnotationSet>(std::move(next));
    std::lock_guard lock(snap);
    current = std::move(ptr);
  }
};

}  // namespace

struct ProjectStore::Impl {
  fs::path root;
  ProjectConfig config;
  StoreOptions options;

  mutable std::shared_mutex docs_mutex;
  std::map<std::string, std::shared_ptr<DocSlot>> docs;

  mutable std::mutex meta_mutex;
  LabelSchema schema;
  int schema_version = 0;
  std::vector<IterationManifest> iterations;

  mutable std::mutex log_mutex;
  std::vector<ReviewAction> log;
  std::int64_t next_action_id = 1;

  std::shared_mutex project_mutex;  // shared: commits; exclusive: iteration export

  fs::path project_file() const { return root / "project.json"; }
  fs::path audit_file() const { return root / "audit.log"; }
  fs::path docs_root() const { return root / config.docs_dir; }
  fs::path doc_dir(const std::string& id) const { return docs_root() / id; }
  fs::path iterations_root() const { return root / config.iterations_dir; }

  std::shared_ptr<DocSlot> slot(const std::string& id) const {
    std::shared_lock lock(docs_mutex);
    auto it = docs.find(id);
    if (it == docs.end()) throw NotFoundError("unknown document " + id);
    return it->second;
  }

  // Caller holds meta_mutex.
  void save_project() const {
    write_json(project_file(), {{"format", kStoreFormat},
                                {"config", config_to_json(config)},
                                {"schema", schema},
                                {"schema_version", schema_version}});
  }

  std::vector<ReviewAction> log_for(const std::string& doc_id) const {
    std::lock_guard lock(log_mutex);
    std::vector<ReviewAction> out;
    for (const ReviewAction& a : log)
      if (a.doc_id == doc_id) out.push_back(a);
    return out;
  }

  void write_annotations(const std::string& doc_id, const AnnotationSet& set) const {
    int version;
    {
      std::lock_guard lock(meta_mutex);
      version = schema_version;
    }
    write_json(doc_dir(doc_id) / "annotations.json", annotation_file(doc_id, version, set));
  }

  void load_log() {
    const fs::path path = audit_file();
    if (!fs::exists(path)) return;
    std::string content = read_file(path);
    // A torn final write (crash mid-append) was never acknowledged; cut it.
    if (!content.empty() && content.back() != '\n') {
      const auto keep = content.rfind('\n');
      content.resize(keep == std::string::npos ? 0 : keep + 1);
      fs::resize_file(path, content.size());
    }
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      ReviewAction a;
      try {
        a = json::parse(line).get<ReviewAction>();
      } catch (const json::exception& e) {
        throw FormatError("audit.log: " + std::string(e.what()), line_no);
      }
      if (a.action_id < next_action_id) throw FormatError("audit.log: action ids must increase", line_no);
      next_action_id = a.action_id + 1;
      log.push_back(std::move(a));
    }
  }
};

ProjectStore::ProjectStore(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ProjectStore::ProjectStore(ProjectStore&&) noexcept = default;
ProjectStore& ProjectStore::operator=(ProjectStore&&) noexcept = default;
ProjectStore::~ProjectStore() = default;

ProjectStore ProjectStore::create(const fs::path& root, const ProjectConfig& config) {
  config.validate();
  if (fs::exists(root / "project.json")) throw Error("a project already exists at " + root.string());
  auto impl = std::make_unique<Impl>();
  impl->root = root;
  impl->config = config;
  fs::create_directories(impl->docs_root());
  fs::create_directories(impl->iterations_root());
  impl->save_project();
  if (!fs::exists(impl->audit_file())) write_atomic(impl->audit_file(), "");
  return ProjectStore(std::move(impl));
}

ProjectStore ProjectStore::open(const fs::path& root, StoreOptions options) {
  auto impl = std::make_unique<Impl>();
  impl->root = root;
  impl->options = options;
  if (!fs::exists(impl->project_file())) throw Error("no project at " + root.string() + " (run init first)");
  const json project = read_json(impl->project_file());
  if (project.value("format", 0) != kStoreFormat) throw FormatError("project.json: unsupported format");
  impl->config = config_from_json(project.at("config"));
  try {
    impl->schema = project.at("schema").get<LabelSchema>();
    impl->schema_version = project.at("schema_version").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("project.json: ") + e.what());
  }
  impl->load_log();

  if (fs::exists(impl->docs_root())) {
    for (const auto& entry : fs::directory_iterator(impl->docs_root())) {
      if (!entry.is_directory() || !fs::exists(entry.path() / "ocr.json")) continue;
      const std::string id = entry.path().filename().string();
      auto slot = std::make_shared<DocSlot>();
      const fs::path baseline_path = entry.path() / "baseline.json";
      const auto actions = impl->log_for(id);
      if (fs::exists(baseline_path)) {
        AnnotationSet expected;
        try {
          expected = replay(annotations_from_file(read_json(baseline_path)), actions);
        } catch (const json::exception& e) {
          throw FormatError(baseline_path.string() + ": " + e.what());
        }
        const fs::path materialized = entry.path() / "annotations.json";
        bool fresh = false;
        if (fs::exists(materialized)) {
          try {
            fresh = annotations_from_file(read_json(materialized)) == expected;
          } catch (const Error&) {
          } catch (const json::exception&) {
          }
        }
        if (!fresh) impl->write_annotations(id, expected);
        slot->publish(std::move(expected));
      } else if (!actions.empty()) {
        throw FormatError("audit.log has actions for " + id + ", which was never bootstrapped");
      }
      impl->docs.emplace(id, std::move(slot));
    }
  }

  if (fs::exists(impl->iterations_root())) {
    for (const auto& entry : fs::directory_iterator(impl->iterations_root())) {
      const fs::path manifest = entry.path() / "manifest.json";
      if (!entry.is_directory() || !fs::exists(manifest)) continue;
      try {
        impl->iterations.push_back(read_json(manifest).get<IterationManifest>());
      } catch (const json::exception& e) {
        throw FormatError(manifest.string() + ": " + e.what());
      }
    }
    std::sort(impl->iterations.begin(), impl->iterations.end(),
              [](const IterationManifest& a, const IterationManifest& b) { return a.iteration < b.iteration; });
  }
  return ProjectStore(std::move(impl));
}

const fs::path& ProjectStore::root() const { return impl_->root; }
const ProjectConfig& ProjectStore::config() const { return impl_->config; }

std::vector<std::string> ProjectStore::doc_ids() const {
  std::shared_lock lock(impl_->docs_mutex);
  std::vector<std::string> ids;
  for (const auto& [id, _] : impl_->docs) ids.push_back(id);
  return ids;
}

bool ProjectStore::has_document(const std::string& doc_id) const {
  std::shared_lock lock(impl_->docs_mutex);
  return impl_->docs.count(doc_id) > 0;
}

bool ProjectStore::put_document(const Document& document, const std::optional<GoldEntitySet>& gold,
                                const std::optional<fs::path>& image) {
  check_doc_id(document.doc_id);
  validate(document);
  std::unique_lock lock(impl_->docs_mutex);
  if (impl_->docs.count(document.doc_id)) return false;
  const fs::path dir = impl_->doc_dir(document.doc_id);
  fs::create_directories(dir);
  Document stored = document;
  if (image) {
    const std::string name = "image" + image->extension().string();
    std::error_code ec;
    fs::copy_file(*image, dir / name, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error("cannot copy page image " + image->string() + ": " + ec.message());
    stored.page.image_ref = name;
  }
  if (gold) write_json(dir / "gold.json", *gold);
  write_json(dir / "ocr.json", stored);
  impl_->docs.emplace(document.doc_id, std::make_shared<DocSlot>());
  return true;
}

Document ProjectStore::document(const std::string& doc_id) const {
  impl_->slot(doc_id);
  try {
    return read_json(impl_->doc_dir(doc_id) / "ocr.json").get<Document>();
  } catch (const json::exception& e) {
    throw FormatError(doc_id + "/ocr.json: " + e.what());
  }
}

std::optional<GoldEntitySet> ProjectStore::gold(const std::string& doc_id) const {
  impl_->slot(doc_id);
  const fs::path path = impl_->doc_dir(doc_id) / "gold.json";
  if (!fs::exists(path)) return std::nullopt;
  try {
    return read_json(path).get<GoldEntitySet>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::optional<fs::path> ProjectStore::image_path(const std::string& doc_id) const {
  const Document doc = document(doc_id);
  if (!doc.page.image_ref) return std::nullopt;
  const fs::path path = impl_->doc_dir(doc_id) / *doc.page.image_ref;
  if (!fs::exists(path)) return std::nullopt;
  return path;
}

std::optional<BootstrapRecord> ProjectStore::bootstrap_record(const std::string& doc_id) const {
  impl_->slot(doc_id);
  const fs::path path = impl_->doc_dir(doc_id) / "entities.json";
  if (!fs::exists(path)) return std::nullopt;
  try {
    return read_json(path).get<BootstrapRecord>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void ProjectStore::put_bootstrap(const std::string& doc_id, const BootstrapRecord& record,
                                 const AnnotationSet& baseline) {
  std::shared_lock project_lock(impl_->project_mutex);
  auto slot = impl_->slot(doc_id);
  std::lock_guard write(slot->write);
  if (!impl_->log_for(doc_id).empty())
    throw Error("document " + doc_id + " is under review; its baseline cannot be replaced");
  const fs::path dir = impl_->doc_dir(doc_id);
  write_json(dir / "entities.json", record);
  write_json(dir / "baseline.json", annotation_file(doc_id, schema_version(), baseline));
  impl_->write_annotations(doc_id, baseline);
  slot->publish(baseline);
}

std::optional<AnnotationSet> ProjectStore::baseline(const std::string& doc_id) const {
  impl_->slot(doc_id);
  const fs::path path = impl_->doc_dir(doc_id) / "baseline.json";
  if (!fs::exists(path)) return std::nullopt;
  try {
    return annotations_from_file(read_json(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

AnnotationSet ProjectStore::annotations(const std::string& doc_id) const {
  return *impl_->slot(doc_id)->snapshot();
}

ReviewAction ProjectStore::commit(ReviewAction draft) {
  std::shared_lock project_lock(impl_->project_mutex);
  auto slot = impl_->slot(draft.doc_id);
  std::lock_guard write(slot->write);
  const auto current = slot->snapshot();

  if (draft.kind == ActionKind::add && draft.payload.is_object()) {
    json& a = draft.payload["annotation"];
    if (a.is_object() && !a.contains("id")) {
      std::size_t n = current->records.size();
      while (current->find(make_annotation_id(draft.doc_id, n))) ++n;
      a["id"] = make_annotation_id(draft.doc_id, n);
    }
  }
  AnnotationSet next = apply_action(*current, draft);

  if (draft.kind == ActionKind::relink) {
    const std::string label = draft.payload.value("new", std::string());
    if (!schema().contains(label)) throw FormatError("relink target \"" + label + "\" is not a schema label");
  }
  std::optional<std::string> new_label;
  if (draft.kind == ActionKind::edit_label) new_label = draft.payload.value("new", std::string());
  if (draft.kind == ActionKind::add) new_label = draft.payload["annotation"].value("label", std::string());

  {
    std::lock_guard lock(impl_->log_mutex);
    draft.action_id = impl_->next_action_id;
    draft.timestamp = timestamp_now();
    append_line(impl_->audit_file(), json(draft).dump(-1, ' ', false, json::error_handler_t::replace));
    impl_->next_action_id++;
    impl_->log.push_back(draft);
  }
  if (impl_->options.crash_after_append) std::_Exit(86);

  if (new_label) {
    std::lock_guard lock(impl_->meta_mutex);
    if (!impl_->schema.contains(*new_label)) {
      impl_->schema.labels.push_back({*new_label, *new_label, {}, 0});
      std::sort(impl_->schema.labels.begin(), impl_->schema.labels.end(),
                [](const LabelEntry& a, const LabelEntry& b) { return a.label_id < b.label_id; });
      ++impl_->schema_version;
      impl_->save_project();
    }
  }
  impl_->write_annotations(draft.doc_id, next);
  slot->publish(std::move(next));
  return draft;
}

std::vector<ReviewAction> ProjectStore::audit_log() const {
  std::lock_guard lock(impl_->log_mutex);
  return impl_->log;
}

std::vector<ReviewAction> ProjectStore::audit_log(const std::string& doc_id) const { return impl_->log_for(doc_id); }

LabelSchema ProjectStore::schema() const {
  std::lock_guard lock(impl_->meta_mutex);
  return impl_->schema;
}

int ProjectStore::schema_version() const {
  std::lock_guard lock(impl_->meta_mutex);
  return impl_->schema_version;
}

void ProjectStore::set_schema(const LabelSchema& schema) {
  std::lock_guard lock(impl_->meta_mutex);
  // Labels introduced during review survive re-induction.
  LabelSchema merged = schema;
  for (const LabelEntry& e : impl_->schema.labels)
    if (!merged.contains(e.label_id) && e.count == 0) merged.labels.push_back(e);
  std::sort(merged.labels.begin(), merged.labels.end(),
            [](const LabelEntry& a, const LabelEntry& b) { return a.label_id < b.label_id; });
  if (merged == impl_->schema) return;
  impl_->schema = std::move(merged);
  ++impl_->schema_version;
  impl_->save_project();
}

std::vector<IterationManifest> ProjectStore::iterations() const {
  std::lock_guard lock(impl_->meta_mutex);
  return impl_->iterations;
}

fs::path ProjectStore::iteration_dir(int iteration) const {
  return impl_->iterations_root() / std::to_string(iteration);
}

void ProjectStore::with_exclusive_lock(const std::function<void()>& fn) {
  std::unique_lock lock(impl_->project_mutex);
  fn();
}

void ProjectStore::record_iteration(const IterationManifest& manifest) {
  fs::create_directories(iteration_dir(manifest.iteration));
  write_json(iteration_dir(manifest.iteration) / "manifest.json", manifest);
  std::lock_guard lock(impl_->meta_mutex);
  impl_->iterations.push_back(manifest);
}

}  // namespace docseed
