#include "manydsl/ll1.hpp"

namespace manydsl {

std::string terminal_key(const TermUse& u) {
  if (u.kind == UseKind::Literal) return "\"" + u.name + "\"";
  if (u.kind == UseKind::Token) return u.name;
  return {};
}

std::set<std::string> first_of(const std::vector<TermUse>& body, std::size_t from, const Ll1Sets& sets,
                               bool& nullable) {
  std::set<std::string> out;
  nullable = true;
  for (std::size_t i = from; i < body.size(); ++i) {
    const TermUse& u = body[i];
    switch (u.kind) {
      case UseKind::Literal:
      case UseKind::Token:
        out.insert(terminal_key(u));
        nullable = false;
        return out;
      case UseKind::Foreign:
        nullable = false;
        return out;
      case UseKind::Nonterminal: {
        if (auto it = sets.first.find(u.name); it != sets.first.end()) out.insert(it->second.begin(), it->second.end());
        if (!sets.nullable.count(u.name)) {
          nullable = false;
          return out;
        }
        break;
      }
      default:
        break;
    }
  }
  return out;
}

Ll1Sets analyze(const Grammar& g) {
  Ll1Sets s;
  for (const auto& r : g.rules) {
    s.first[r.head];
    s.follow[r.head];
  }
  for (const auto& e : g.entries) s.follow[e].insert(kEndOfInput);

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : g.rules) {
      for (const auto& p : r.productions) {
        bool nullable = false;
        auto first = first_of(p.body, 0, s, nullable);
        auto& target = s.first[r.head];
        for (const auto& t : first) changed |= target.insert(t).second;
        if (nullable) changed |= s.nullable.insert(r.head).second;
      }
    }
  }

  changed = true;
  while (changed) {
    changed = false;
    for (const auto& r : g.rules) {
      for (const auto& p : r.productions) {
        for (std::size_t i = 0; i < p.body.size(); ++i) {
          const TermUse& u = p.body[i];
          if (u.kind != UseKind::Nonterminal || !g.rule(u.name)) continue;
          bool nullable = false;
          auto rest = first_of(p.body, i + 1, s, nullable);
          auto& target = s.follow[u.name];
          for (const auto& t : rest) changed |= target.insert(t).second;
          if (nullable) {
            // copy first: target may alias the head's set
            auto head = s.follow[r.head];
            for (const auto& t : head) changed |= target.insert(t).second;
          }
        }
      }
    }
  }
  return s;
}

const std::string* ParseTable::lookup(const std::string& rule, const std::string& terminal) const {
  auto it = cells.find({rule, terminal});
  return it == cells.end() ? nullptr : &it->second;
}

ParseTable build_table(const Grammar& g) {
  ParseTable t;
  t.sets = analyze(g);
  std::set<std::pair<std::string, std::string>> reported;
  for (const auto& r : g.rules) {
    for (const auto& p : r.productions) {
      bool nullable = false;
      auto select = first_of(p.body, 0, t.sets, nullable);
      if (nullable) {
        const auto& follow = t.sets.follow[r.head];
        select.insert(follow.begin(), follow.end());
      }
      for (const auto& term : select) {
        auto [it, fresh] = t.cells.emplace(std::make_pair(r.head, term), p.id);
        if (fresh || it->second == p.id) continue;
        if (!reported.insert({it->second + "/" + p.id, term}).second) continue;
        t.conflicts.push_back({"LL(1) conflict in " + r.head + " on " + term + ": " + it->second + " and " + p.id,
                               p.pos});
      }
    }
  }
  if (!t.conflicts.empty()) t.cells.clear();
  return t;
}

std::vector<Diagnostic> validate_foreign_positions(const Grammar& g) {
  std::vector<Diagnostic> out;
  Ll1Sets sets = analyze(g);
  for (const auto& r : g.rules) {
    if (r.productions.size() < 2) continue;
    for (const auto& p : r.productions) {
      for (const auto& u : p.body) {
        if (u.kind == UseKind::Foreign) {
          out.push_back({p.id + ": alternative of " + r.head + " starts with foreign nonterminal !" + u.lang + "." +
                             u.name + ", whose tokens cannot select it",
                         u.pos});
          break;
        }
        if (u.kind == UseKind::Literal || u.kind == UseKind::Token) break;
        if (u.kind == UseKind::Nonterminal && !sets.nullable.count(u.name)) break;
      }
    }
  }
  return out;
}

namespace {

std::string set_text(const std::set<std::string>& s, bool epsilon) {
  std::string out = "{";
  bool first = true;
  for (const auto& t : s) {
    if (!first) out += ", ";
    out += t;
    first = false;
  }
  if (epsilon) out += first ? "epsilon" : ", epsilon";
  return out + "}";
}

}  // namespace

std::string print_sets(const Grammar& g, const Ll1Sets& sets) {
  std::string out;
  for (const auto& r : g.rules) {
    bool nullable = sets.nullable.count(r.head) > 0;
    out += "FIRST(" + r.head + ") = " + set_text(sets.first.at(r.head), nullable) + "\n";
  }
  for (const auto& r : g.rules) out += "FOLLOW(" + r.head + ") = " + set_text(sets.follow.at(r.head), false) + "\n";
  return out;
}

std::string print_table(const Grammar& g, const ParseTable& table) {
  std::string out;
  if (!table.ok()) {
    for (const auto& c : table.conflicts) out += c.message + "\n";
    return out;
  }
  for (const auto& r : g.rules) {
    for (const auto& [key, id] : table.cells) {
      if (key.first == r.head) out += r.head + " , " + key.second + " -> " + id + "\n";
    }
  }
  return out;
}

}  // namespace manydsl
