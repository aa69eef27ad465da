// Copyright 2026 The ucoref Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UCOREF_PASSAGE_HPP_
#define UCOREF_PASSAGE_HPP_

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucoref {

// Foundational-layer edge categories.
enum class Category {
  ParallelScene,  // H
  Process,        // P
  State,          // S
  Participant,    // A
  Center,         // C
  Elaborator,     // E
  Adverbial,      // D
  Function,       // F
  Relator,        // R
  Time,           // T
  Quantity,       // Q
  Ground,         // G
  Linker,         // L
  Connector,      // N
  Punctuation,    // U
};

// Single-letter code used in the XML interchange format.
char category_code(Category c);
std::optional<Category> category_from_code(char code);

// Parses a possibly multi-category edge label like "A" or "A|E".
std::vector<Category> categories_from_label(const std::string& label);
std::string categories_to_label(const std::vector<Category>& cats);

struct Terminal {
  std::string id;   // layer-0 node id, "0.<position>"
  int position = 0; // 1-based token index within the passage
  std::string text;
  bool is_punct = false;
  int paragraph = 1;
  int paragraph_position = 1;
};

struct Edge {
  std::string parent;
  std::string child;
  std::vector<Category> categories; // sorted, unique, non-empty
  bool remote = false;

  bool has_category(Category c) const;
};

struct Unit {
  std::string id; // layer-1 node id, "1.<k>"
  bool implicit = false;
  bool unanalyzable = false;
  std::vector<Edge> outgoing;          // document order
  std::vector<int> terminal_positions; // directly anchored tokens, sorted
};

// Token-position set for a mention span. Positions are sorted and unique;
// an empty set is the null span (implicit units).
struct TokenSpan {
  std::string doc_id;
  std::vector<int> positions;

  bool null_span() const { return positions.empty(); }
  bool contains(int pos) const;
  int leftmost() const; // 0 for null spans
};

bool operator==(const TokenSpan& a, const TokenSpan& b);

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Orders unit ids "L.k" numerically by (L, k), falling back to string order.
struct UnitIdLess {
  bool operator()(const std::string& a, const std::string& b) const;
};

// An immutable foundational-layer passage. Primary (non-remote) edges form a
// tree rooted at root_id; remote edges add reentrancies, and the full graph
// is acyclic. All queries are read-only.
class Passage {
 public:
  std::string doc_id;
  std::vector<Terminal> terminals; // sorted by position, contiguous 1..N
  std::map<std::string, Unit, UnitIdLess> units;
  std::string root_id;

  const Unit& unit(const std::string& id) const;
  bool has_unit(const std::string& id) const { return units.count(id) > 0; }
  const Terminal& terminal_at(int position) const;

  // Primary incoming edge; nullptr for the root.
  const Edge* primary_incoming(const std::string& id) const;
  std::vector<const Edge*> remote_incoming(const std::string& id) const;

  bool incoming_has(const std::string& id, Category c,
                    bool include_remote = false) const;

  // Child units reachable by one primary edge carrying the category.
  std::vector<std::string> primary_children(const std::string& id,
                                            Category c) const;

  // Validates all structural invariants; called by parse_passage. Throws
  // ParseError naming the offending node or edge.
  void check() const;

  void rebuild_indices();

 private:
  std::map<std::string, Edge, UnitIdLess> primary_in_;
  std::map<std::string, std::vector<Edge>, UnitIdLess> remote_in_;
};

// Reads a passage from the UCCA XML interchange format (layer 0 terminals,
// layer 1 units). Throws ParseError on malformed input, unknown edge
// targets, duplicate terminal positions, or cycles.
Passage parse_passage(const std::string& xml_text);
Passage parse_passage_file(const std::string& path);

std::string serialize_passage(const Passage& p);

// Structural equality over ids, edges, categories, flags, and terminals.
bool passage_equal(const Passage& a, const Passage& b);

// Token positions reachable from the unit via primary edges. Punctuation
// terminals are excluded by default; implicit units yield the null span.
TokenSpan yield_span(const Passage& p, const std::string& unit_id,
                     bool include_punct = false);

// Head units found by descending primary Center/State/Process edges.
// Unanalyzable and implicit units are their own head; multi-Center units
// return one head per Center.
std::vector<std::string> semantic_head(const Passage& p,
                                       const std::string& unit_id);

// Head token span: union of yields of the semantic-head units.
TokenSpan head_span(const Passage& p, const std::string& unit_id);

// True iff the unit has an outgoing primary Process or State edge.
bool is_scene(const Passage& p, const std::string& unit_id);

}  // namespace ucoref

#endif  // UCOREF_PASSAGE_HPP_
