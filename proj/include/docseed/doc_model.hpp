#pragma once

// Geometric and document types shared by every stage of the pipeline.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docseed {

// Axis-aligned box in integer pixels, origin top-left, edges inclusive of x1/y1.
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  bool valid() const noexcept { return x1 >= 0 && y1 >= 0 && x1 <= x2 && y1 <= y2; }
  int width() const noexcept { return x2 - x1; }
  int height() const noexcept { return y2 - y1; }
  double center_x() const noexcept { return (x1 + x2) / 2.0; }
  double center_y() const noexcept { return (y1 + y2) / 2.0; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

BBox bbox_union(const BBox& a, const BBox& b) noexcept;

// sqrt(dcx^2 + (vertical_weight * dcy)^2) over box centers.
double center_distance(const BBox& a, const BBox& b, double vertical_weight = 1.0) noexcept;

// Overlap of the [y1,y2] spans divided by the smaller height. A zero-height box
// counts as fully overlapping when its y lies inside the other span.
double vertical_overlap_ratio(const BBox& a, const BBox& b) noexcept;

inline constexpr double kDefaultLineOverlap = 0.5;

// Partition boxes into text lines: boxes whose vertical overlap ratio reaches
// `threshold` share a line (transitively). Lines come back top to bottom, each
// sorted left to right; `tie_ids` (parallel to `boxes`) break every tie.
std::vector<std::vector<std::size_t>> group_lines(std::span<const BBox> boxes,
                                                  std::span<const int> tie_ids,
                                                  double threshold = kDefaultLineOverlap);

enum class GenericLabel : std::uint8_t { key = 0, value = 1, header = 2, other = 3 };

// Fixed order, also the argmax tie-break order.
inline constexpr std::array<GenericLabel, 4> kGenericLabels = {
    GenericLabel::key, GenericLabel::value, GenericLabel::header, GenericLabel::other};

std::string_view to_string(GenericLabel label) noexcept;
std::optional<GenericLabel> parse_generic_label(std::string_view name) noexcept;

struct Token {
  int index = 0;
  std::string text;
  BBox box;
  std::optional<double> ocr_confidence;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Page {
  int width = 0;
  int height = 0;
  std::optional<std::string> image_ref;

  double diagonal() const noexcept;
  bool contains(const BBox& box) const noexcept {
    return box.valid() && box.x2 <= width && box.y2 <= height;
  }

  friend bool operator==(const Page&, const Page&) = default;
};

struct Document {
  std::string doc_id;
  Page page;
  std::vector<Token> tokens;

  friend bool operator==(const Document&, const Document&) = default;
};

// Throws FormatError when the page is empty, indices are not 0..n-1, a token
// text is blank or a box falls outside the page.
void validate(const Document& doc);

struct Entity {
  int id = 0;
  GenericLabel label = GenericLabel::other;
  std::vector<int> token_indices;
  std::string text;
  BBox box;

  friend bool operator==(const Entity&, const Entity&) = default;
};

// Directed key -> value association between two entity ids.
struct Link {
  int key_id = 0;
  int value_id = 0;

  friend auto operator<=>(const Link&, const Link&) = default;
};

// Builds an entity with text and box recomputed from the member tokens.
// Throws std::invalid_argument on an empty or out-of-range member list.
Entity make_entity(int id, GenericLabel label, std::vector<int> token_indices, const Document& doc);

// Entity ids in line-major order: lines top to bottom, left to right within a
// line, entity id on ties. Independent of the order of `entities`.
std::vector<int> reading_order(std::span<const Entity> entities,
                               double line_threshold = kDefaultLineOverlap);

// Trim ASCII whitespace from both ends.
std::string trim(std::string_view s);

}  // namespace docseed
