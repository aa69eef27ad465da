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

#include "ucoref/passage.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace ucoref {

namespace {

namespace pt = boost::property_tree;

const std::pair<char, Category> kCategoryCodes[] = {
    {'H', Category::ParallelScene}, {'P', Category::Process},
    {'S', Category::State},         {'A', Category::Participant},
    {'C', Category::Center},        {'E', Category::Elaborator},
    {'D', Category::Adverbial},     {'F', Category::Function},
    {'R', Category::Relator},       {'T', Category::Time},
    {'Q', Category::Quantity},      {'G', Category::Ground},
    {'L', Category::Linker},        {'N', Category::Connector},
    {'U', Category::Punctuation},
};

bool truthy(const std::string& v) {
  return v == "True" || v == "true" || v == "1";
}

// Splits "L.k" into numeric (layer, index); returns false for other shapes.
bool split_node_id(const std::string& id, long& layer, long& index) {
  auto dot = id.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= id.size())
    return false;
  try {
    size_t used = 0;
    layer = std::stol(id.substr(0, dot), &used);
    if (used != dot) return false;
    index = std::stol(id.substr(dot + 1), &used);
    if (used != id.size() - dot - 1) return false;
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

char category_code(Category c) {
  for (const auto& [code, cat] : kCategoryCodes)
    if (cat == c) return code;
  return '?';
}

std::optional<Category> category_from_code(char code) {
  for (const auto& [c, cat] : kCategoryCodes)
    if (c == code) return cat;
  return std::nullopt;
}

std::vector<Category> categories_from_label(const std::string& label) {
  std::vector<Category> cats;
  std::stringstream ss(label);
  std::string part;
  while (std::getline(ss, part, '|')) {
    if (part.size() != 1)
      throw ParseError("unknown edge category '" + part + "'");
    auto cat = category_from_code(part[0]);
    if (!cat) throw ParseError("unknown edge category '" + part + "'");
    cats.push_back(*cat);
  }
  if (cats.empty()) throw ParseError("edge carries no category");
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  return cats;
}

std::string categories_to_label(const std::vector<Category>& cats) {
  std::string label;
  for (Category c : cats) {
    if (!label.empty()) label += '|';
    label += category_code(c);
  }
  return label;
}

bool Edge::has_category(Category c) const {
  return std::find(categories.begin(), categories.end(), c) !=
         categories.end();
}

bool TokenSpan::contains(int pos) const {
  return std::binary_search(positions.begin(), positions.end(), pos);
}

int TokenSpan::leftmost() const {
  return positions.empty() ? 0 : positions.front();
}

bool operator==(const TokenSpan& a, const TokenSpan& b) {
  return a.positions == b.positions;
}

bool UnitIdLess::operator()(const std::string& a, const std::string& b) const {
  long la, ia, lb, ib;
  if (split_node_id(a, la, ia) && split_node_id(b, lb, ib))
    return la != lb ? la < lb : ia < ib;
  return a < b;
}

const Unit& Passage::unit(const std::string& id) const {
  auto it = units.find(id);
  if (it == units.end()) throw ParseError("unknown unit id '" + id + "'");
  return it->second;
}

const Terminal& Passage::terminal_at(int position) const {
  if (position < 1 || position > static_cast<int>(terminals.size()))
    throw ParseError("terminal position " + std::to_string(position) +
                     " out of range");
  return terminals[position - 1];
}

const Edge* Passage::primary_incoming(const std::string& id) const {
  auto it = primary_in_.find(id);
  return it == primary_in_.end() ? nullptr : &it->second;
}

std::vector<const Edge*> Passage::remote_incoming(const std::string& id) const {
  std::vector<const Edge*> out;
  auto it = remote_in_.find(id);
  if (it != remote_in_.end())
    for (const Edge& e : it->second) out.push_back(&e);
  return out;
}

bool Passage::incoming_has(const std::string& id, Category c,
                           bool include_remote) const {
  if (const Edge* e = primary_incoming(id))
    if (e->has_category(c)) return true;
  if (include_remote)
    for (const Edge* e : remote_incoming(id))
      if (e->has_category(c)) return true;
  return false;
}

std::vector<std::string> Passage::primary_children(const std::string& id,
                                                   Category c) const {
  std::vector<std::string> out;
  for (const Edge& e : unit(id).outgoing)
    if (!e.remote && e.has_category(c)) out.push_back(e.child);
  return out;
}

void Passage::rebuild_indices() {
  primary_in_.clear();
  remote_in_.clear();
  for (const auto& [id, u] : units) {
    for (const Edge& e : u.outgoing) {
      if (e.remote) {
        remote_in_[e.child].push_back(e);
      } else {
        if (primary_in_.count(e.child))
          throw ParseError("unit '" + e.child +
                           "' has multiple primary incoming edges");
        primary_in_[e.child] = e;
      }
    }
  }
}

void Passage::check() const {
  // Terminals: contiguous positions 1..N, non-empty text.
  for (size_t i = 0; i < terminals.size(); ++i) {
    if (terminals[i].position != static_cast<int>(i) + 1)
      throw ParseError("duplicate or missing terminal position " +
                       std::to_string(terminals[i].position) + " (node '" +
                       terminals[i].id + "')");
    if (terminals[i].text.empty())
      throw ParseError("terminal '" + terminals[i].id + "' has empty text");
    if (terminals[i].paragraph < 1)
      throw ParseError("terminal '" + terminals[i].id +
                       "' has non-positive paragraph");
  }

  if (!units.count(root_id))
    throw ParseError("root unit '" + root_id + "' missing");

  for (const auto& [id, u] : units) {
    for (const Edge& e : u.outgoing) {
      if (!units.count(e.child) &&
          !(e.child.rfind("0.", 0) == 0))  // terminals resolved at parse
        throw ParseError("edge from '" + id + "' references unknown node '" +
                         e.child + "'");
      if (e.categories.empty())
        throw ParseError("edge " + id + "->" + e.child + " has no category");
    }
    if (u.implicit && (!u.outgoing.empty() || !u.terminal_positions.empty()))
      throw ParseError("implicit unit '" + id + "' has children or terminals");
    for (int pos : u.terminal_positions)
      if (pos < 1 || pos > static_cast<int>(terminals.size()))
        throw ParseError("unit '" + id + "' anchors unknown terminal " +
                         std::to_string(pos));
  }

  // Every non-root unit has exactly one primary parent; the root has none.
  for (const auto& [id, u] : units) {
    const Edge* in = primary_incoming(id);
    if (id == root_id) {
      if (in)
        throw ParseError("root unit '" + id + "' has an incoming edge from '" +
                         in->parent + "'");
    } else if (!in) {
      if (!remote_incoming(id).empty())
        throw ParseError("unit '" + id +
                         "' has only remote incoming edges");
      throw ParseError("unit '" + id + "' is unreachable (no primary parent)");
    }
  }

  // Primary subgraph must be a tree: every unit reachable from the root.
  std::set<std::string> seen;
  std::vector<std::string> stack = {root_id};
  while (!stack.empty()) {
    std::string id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second)
      throw ParseError("cycle in primary edges at unit '" + id + "'");
    for (const Edge& e : unit(id).outgoing)
      if (!e.remote) stack.push_back(e.child);
  }
  if (seen.size() != units.size()) {
    for (const auto& [id, u] : units)
      if (!seen.count(id))
        throw ParseError("cycle in primary edges involving unit '" + id + "'");
  }

  // Full graph (with remotes) must be acyclic.
  std::map<std::string, int, UnitIdLess> color;  // 0 new, 1 open, 2 done
  std::function<void(const std::string&)> dfs = [&](const std::string& id) {
    color[id] = 1;
    for (const Edge& e : unit(id).outgoing) {
      int c = color[e.child];
      if (c == 1)
        throw ParseError("cycle through remote edge at unit '" + e.child +
                         "'");
      if (c == 0) dfs(e.child);
    }
    color[id] = 2;
  };
  dfs(root_id);

  // Every terminal is anchored exactly once under primary edges.
  std::vector<int> covered(terminals.size() + 1, 0);
  for (const auto& [id, u] : units)
    for (int pos : u.terminal_positions) covered[pos]++;
  for (size_t pos = 1; pos < covered.size(); ++pos) {
    if (covered[pos] == 0)
      throw ParseError("terminal position " + std::to_string(pos) +
                       " is not attached to any unit");
    if (covered[pos] > 1)
      throw ParseError("terminal position " + std::to_string(pos) +
                       " is attached to multiple units");
  }
}

Passage parse_passage(const std::string& xml_text) {
  pt::ptree tree;
  try {
    std::stringstream ss(xml_text);
    pt::read_xml(ss, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }

  auto root_el = tree.get_child_optional("root");
  if (!root_el) throw ParseError("missing <root> element");

  Passage p;
  p.doc_id = root_el->get<std::string>("<xmlattr>.passageID", "");

  std::map<std::string, Terminal> terminals_by_id;
  struct RawEdge {
    std::string to;
    std::string label;
    bool remote;
  };
  struct RawNode {
    std::string type;
    bool implicit = false;
    std::vector<RawEdge> edges;
  };
  std::map<std::string, RawNode, UnitIdLess> layer1;

  for (const auto& [key, layer] : *root_el) {
    if (key != "layer") continue;
    std::string layer_id = layer.get<std::string>("<xmlattr>.layerID", "");
    for (const auto& [nkey, node] : layer) {
      if (nkey != "node") continue;
      std::string id = node.get<std::string>("<xmlattr>.ID", "");
      std::string type = node.get<std::string>("<xmlattr>.type", "");
      if (id.empty()) throw ParseError("node without ID in layer " + layer_id);

      if (layer_id == "0") {
        Terminal t;
        t.id = id;
        long layer_num, index;
        if (!split_node_id(id, layer_num, index) || layer_num != 0)
          throw ParseError("bad terminal id '" + id + "'");
        t.position = static_cast<int>(index);
        t.is_punct = (type == "Punctuation");
        t.text = node.get<std::string>("attributes.<xmlattr>.text", "");
        t.paragraph = node.get<int>("attributes.<xmlattr>.paragraph", 1);
        t.paragraph_position =
            node.get<int>("attributes.<xmlattr>.paragraph_position", 0);
        if (terminals_by_id.count(id))
          throw ParseError("duplicate terminal id '" + id + "'");
        terminals_by_id[id] = t;
      } else if (layer_id == "1") {
        if (type != "FN" && type != "PNCT") continue;  // e.g. linkage nodes
        RawNode rn;
        rn.type = type;
        rn.implicit = truthy(
            node.get<std::string>("attributes.<xmlattr>.implicit", ""));
        for (const auto& [ekey, edge] : node) {
          if (ekey != "edge") continue;
          RawEdge re;
          re.to = edge.get<std::string>("<xmlattr>.toID", "");
          re.label = edge.get<std::string>("<xmlattr>.type", "");
          re.remote = truthy(
              edge.get<std::string>("attributes.<xmlattr>.remote", ""));
          if (re.to.empty())
            throw ParseError("edge from '" + id + "' has no toID");
          rn.edges.push_back(re);
        }
        if (layer1.count(id))
          throw ParseError("duplicate unit id '" + id + "'");
        layer1[id] = rn;
      }
    }
  }

  // Terminal order and contiguity.
  std::map<int, Terminal> by_position;
  for (auto& [id, t] : terminals_by_id) {
    if (by_position.count(t.position))
      throw ParseError("duplicate terminal position " +
                       std::to_string(t.position) + " (node '" + id + "')");
    by_position[t.position] = t;
  }
  int next_pp = 1, last_para = 0;
  for (auto& [pos, t] : by_position) {
    if (t.paragraph != last_para) next_pp = 1;
    if (t.paragraph_position == 0) t.paragraph_position = next_pp;
    last_para = t.paragraph;
    ++next_pp;
    p.terminals.push_back(t);
  }

  // Build units; resolve Terminal and category edges.
  for (const auto& [id, rn] : layer1) {
    Unit u;
    u.id = id;
    u.implicit = rn.implicit;
    int terminal_children = 0, unit_children = 0;
    for (const RawEdge& re : rn.edges) {
      bool to_terminal = terminals_by_id.count(re.to) > 0;
      bool to_unit = layer1.count(re.to) > 0;
      if (!to_terminal && !to_unit)
        throw ParseError("edge " + id + "->" + re.to +
                         " references unknown node id '" + re.to + "'");
      if (to_terminal) {
        if (re.label != "Terminal" && re.label != "U" && re.label != "")
          throw ParseError("edge " + id + "->" + re.to +
                           " to a terminal must have type Terminal");
        u.terminal_positions.push_back(terminals_by_id[re.to].position);
        ++terminal_children;
      } else {
        Edge e;
        e.parent = id;
        e.child = re.to;
        e.remote = re.remote;
        try {
          e.categories = categories_from_label(re.label);
        } catch (const ParseError& err) {
          throw ParseError(std::string(err.what()) + " (edge " + id + "->" +
                           re.to + ")");
        }
        u.outgoing.push_back(e);
        if (!e.remote) ++unit_children;
      }
    }
    std::sort(u.terminal_positions.begin(), u.terminal_positions.end());
    u.unanalyzable = terminal_children > 1 && unit_children == 0;
    p.units[id] = u;
  }

  // The root is the unique unit without a primary parent.
  std::set<std::string> has_primary_parent;
  for (const auto& [id, u] : p.units)
    for (const Edge& e : u.outgoing)
      if (!e.remote && p.units.count(e.child)) has_primary_parent.insert(e.child);
  std::vector<std::string> roots;
  for (const auto& [id, u] : p.units)
    if (!has_primary_parent.count(id)) roots.push_back(id);
  if (roots.empty()) throw ParseError("no root unit (cycle in primary edges)");
  if (roots.size() > 1)
    throw ParseError("multiple root units: '" + roots[0] + "', '" + roots[1] +
                     "'");
  p.root_id = roots[0];

  p.rebuild_indices();
  p.check();
  return p;
}

Passage parse_passage_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_passage(ss.str());
}

std::string serialize_passage(const Passage& p) {
  pt::ptree root;
  root.put("<xmlattr>.passageID", p.doc_id);

  pt::ptree layer0;
  layer0.put("<xmlattr>.layerID", "0");
  for (const Terminal& t : p.terminals) {
    pt::ptree node;
    node.put("<xmlattr>.ID", t.id);
    node.put("<xmlattr>.type", t.is_punct ? "Punctuation" : "Word");
    pt::ptree attrs;
    attrs.put("<xmlattr>.text", t.text);
    attrs.put("<xmlattr>.paragraph", t.paragraph);
    attrs.put("<xmlattr>.paragraph_position", t.paragraph_position);
    node.add_child("attributes", attrs);
    layer0.add_child("node", node);
  }
  root.add_child("layer", layer0);

  pt::ptree layer1;
  layer1.put("<xmlattr>.layerID", "1");
  for (const auto& [id, u] : p.units) {
    pt::ptree node;
    node.put("<xmlattr>.ID", id);
    node.put("<xmlattr>.type", "FN");
    if (u.implicit) {
      pt::ptree attrs;
      attrs.put("<xmlattr>.implicit", "True");
      node.add_child("attributes", attrs);
    }
    for (const Edge& e : u.outgoing) {
      pt::ptree edge;
      edge.put("<xmlattr>.toID", e.child);
      edge.put("<xmlattr>.type", categories_to_label(e.categories));
      if (e.remote) {
        pt::ptree attrs;
        attrs.put("<xmlattr>.remote", "True");
        edge.add_child("attributes", attrs);
      }
      node.add_child("edge", edge);
    }
    for (int pos : u.terminal_positions) {
      pt::ptree edge;
      edge.put("<xmlattr>.toID", p.terminal_at(pos).id);
      edge.put("<xmlattr>.type", "Terminal");
      node.add_child("edge", edge);
    }
    layer1.add_child("node", node);
  }
  root.add_child("layer", layer1);

  pt::ptree doc;
  doc.add_child("root", root);
  std::stringstream out;
  pt::write_xml(out, doc,
                pt::xml_writer_settings<std::string>(' ', 2));
  return out.str();
}

bool passage_equal(const Passage& a, const Passage& b) {
  if (a.doc_id != b.doc_id || a.root_id != b.root_id) return false;
  if (a.terminals.size() != b.terminals.size()) return false;
  for (size_t i = 0; i < a.terminals.size(); ++i) {
    const Terminal &ta = a.terminals[i], &tb = b.terminals[i];
    if (ta.id != tb.id || ta.position != tb.position || ta.text != tb.text ||
        ta.is_punct != tb.is_punct || ta.paragraph != tb.paragraph)
      return false;
  }
  if (a.units.size() != b.units.size()) return false;
  for (const auto& [id, ua] : a.units) {
    auto it = b.units.find(id);
    if (it == b.units.end()) return false;
    const Unit& ub = it->second;
    if (ua.implicit != ub.implicit || ua.unanalyzable != ub.unanalyzable ||
        ua.terminal_positions != ub.terminal_positions ||
        ua.outgoing.size() != ub.outgoing.size())
      return false;
    for (size_t i = 0; i < ua.outgoing.size(); ++i) {
      const Edge &ea = ua.outgoing[i], &eb = ub.outgoing[i];
      if (ea.child != eb.child || ea.remote != eb.remote ||
          ea.categories != eb.categories)
        return false;
    }
  }
  return true;
}

TokenSpan yield_span(const Passage& p, const std::string& unit_id,
                     bool include_punct) {
  const Unit& u = p.unit(unit_id);
  TokenSpan span;
  span.doc_id = p.doc_id;
  if (u.implicit) return span;

  std::set<int> positions;
  std::set<std::string> seen;
  std::vector<std::string> stack = {unit_id};
  while (!stack.empty()) {
    std::string id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    const Unit& cur = p.unit(id);
    for (int pos : cur.terminal_positions) positions.insert(pos);
    for (const Edge& e : cur.outgoing)
      if (!e.remote) stack.push_back(e.child);
  }
  for (int pos : positions)
    if (include_punct || !p.terminal_at(pos).is_punct)
      span.positions.push_back(pos);
  return span;
}

std::vector<std::string> semantic_head(const Passage& p,
                                       const std::string& unit_id) {
  const Unit& u = p.unit(unit_id);
  if (u.implicit || u.unanalyzable) return {unit_id};

  std::vector<std::string> next;
  for (const Edge& e : u.outgoing) {
    if (e.remote) continue;
    if (e.has_category(Category::Center) || e.has_category(Category::State) ||
        e.has_category(Category::Process))
      next.push_back(e.child);
  }
  if (next.empty()) return {unit_id};

  std::vector<std::string> heads;
  for (const std::string& child : next)
    for (const std::string& h : semantic_head(p, child)) heads.push_back(h);
  std::sort(heads.begin(), heads.end(), UnitIdLess());
  heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
  return heads;
}

TokenSpan head_span(const Passage& p, const std::string& unit_id) {
  TokenSpan span;
  span.doc_id = p.doc_id;
  std::set<int> positions;
  for (const std::string& h : semantic_head(p, unit_id)) {
    TokenSpan hy = yield_span(p, h, /*include_punct=*/false);
    positions.insert(hy.positions.begin(), hy.positions.end());
  }
  span.positions.assign(positions.begin(), positions.end());
  return span;
}

bool is_scene(const Passage& p, const std::string& unit_id) {
  for (const Edge& e : p.unit(unit_id).outgoing)
    if (!e.remote && (e.has_category(Category::Process) ||
                      e.has_category(Category::State)))
      return true;
  return false;
}

}  // namespace ucoref
