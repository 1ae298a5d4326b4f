#pragma once

// Seeded synthetic forms for fixtures, fuzzing and demos.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "docseed/doc_model.hpp"
#include "docseed/ingest.hpp"

namespace docseed {

// A fax/invoice-like form: header rows, key/value rows (some two-column, some
// values wrapping onto a second line, some keys without values) and filler
// text. Gold entities cover every token; links follow the layout.
std::pair<Document, GoldEntitySet> synth_form(std::mt19937_64& rng, const std::string& doc_id);

// Up to `max_entities` labeled entities with random, possibly overlapping
// boxes snapped to a coarse grid (so distance and ordering ties occur).
std::vector<Entity> synth_link_entities(std::mt19937_64& rng, int max_entities, const Page& page);

// The fax cover sheet from the running example: keys To:, Fax Number:,
// Phone Number:, Date: and values George Baroody, (336) 335-7392, 12/10/98.
std::pair<Document, GoldEntitySet> fax_mini_form();

}  // namespace docseed
