#pragma once

// JSON readers for signatures, finite languages, relations, semantic
// translations and head-map translations.

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vtrans/error.hpp"
#include "vtrans/finite.hpp"
#include "vtrans/term.hpp"
#include "vtrans/translation.hpp"

namespace vtrans {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

namespace detail {

template <class T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw InputError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(what + ": field '" + key + "': " + e.what());
  }
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) out.push_back(cur);
  if (s.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// { "name", "constructs": [ { "name", "args", "binders": [[slot...] per arg], "names": [positions] } ] }
inline std::shared_ptr<Signature> signature_from_json(const json& j) {
  auto sig = std::make_shared<Signature>(detail::field<std::string>(j, "name", "signature"));
  for (const auto& c : detail::field<json>(j, "constructs", "signature " + sig->name())) {
    std::string what = "signature " + sig->name();
    auto name = detail::field<std::string>(c, "name", what);
    auto arity = detail::field<long>(c, "args", what + " construct " + name);
    if (arity < 0) throw StructuralError(what + ": negative argument count for '" + name + "'");
    std::vector<std::vector<std::string>> binders;
    if (c.contains("binders")) binders = c.at("binders").get<std::vector<std::vector<std::string>>>();
    std::vector<std::size_t> names;
    if (c.contains("names")) names = c.at("names").get<std::vector<std::size_t>>();
    sig->add(name, static_cast<std::size_t>(arity), binders, names);
  }
  return sig;
}

/// { "name", "values": [...], "operators": [ { "name", "arity", "table": { "v1,v2": "r" } } ] }
inline FiniteLanguage language_from_json(const json& j) {
  std::string name = detail::field<std::string>(j, "name", "language");
  std::string what = "language " + name;
  FiniteLanguage lang(name, detail::field<std::vector<std::string>>(j, "values", what));
  for (const auto& op : detail::field<json>(j, "operators", what)) {
    auto oname = detail::field<std::string>(op, "name", what);
    auto arity = detail::field<long>(op, "arity", what + " operator " + oname);
    if (arity < 0) throw InputError(what + ": negative arity for '" + oname + "'");
    auto table = detail::field<std::map<std::string, std::string>>(op, "table", what + " operator " + oname);
    std::size_t cells = 1;
    for (long i = 0; i < arity; ++i) cells *= lang.size();
    std::vector<std::size_t> flat(cells, lang.size());
    for (const auto& [key, result] : table) {
      auto args = detail::split_commas(key);
      if (static_cast<long>(args.size()) != arity)
        throw InputError(what + ": operator '" + oname + "' table key '" + key + "' has wrong arity");
      std::size_t idx = 0;
      for (const auto& a : args) idx = idx * lang.size() + lang.value_index(a);
      flat[idx] = lang.value_index(result);
    }
    for (std::size_t i = 0; i < cells; ++i)
      if (flat[i] == lang.size()) throw InputError(what + ": operator '" + oname + "' table is not total");
    lang.add_operator(oname, static_cast<std::size_t>(arity), std::move(flat));
  }
  return lang;
}

/// { "name", "kind": "equivalence"|"preorder", "carrier": [...], "pairs": [[a,b],...] }
inline Relation relation_from_json(const json& j) {
  std::string name = detail::field<std::string>(j, "name", "relation");
  std::string what = "relation " + name;
  auto kind_s = detail::field<std::string>(j, "kind", what);
  RelationKind kind;
  if (kind_s == "equivalence")
    kind = RelationKind::Equivalence;
  else if (kind_s == "preorder")
    kind = RelationKind::Preorder;
  else
    throw InputError(what + ": unknown kind '" + kind_s + "'");
  auto carrier = detail::field<std::vector<std::string>>(j, "carrier", what);
  auto pairs = detail::field<std::vector<std::pair<std::string, std::string>>>(j, "pairs", what);
  return close_relation(name, kind, carrier, pairs);
}

/// { "source", "target", "pairs": [[target value, source value], ...] }
inline SemanticTranslation semantic_translation_from_json(const json& j, const FiniteLanguage& source,
                                                          const FiniteLanguage& target) {
  const std::string what = "semantic translation";
  auto src = detail::field<std::string>(j, "source", what);
  auto tgt = detail::field<std::string>(j, "target", what);
  if (src != source.name() || tgt != target.name())
    throw ConfigError(what + " is from '" + tgt + "' to '" + src + "', expected '" + target.name() + "' to '" +
                      source.name() + "'");
  auto pairs = detail::field<std::vector<std::pair<std::string, std::string>>>(j, "pairs", what);
  return make_translation(target, source, pairs);
}

/// { "source", "target", "heads": { op: "term over X1..Xn" } }
inline HeadMap translation_from_json(const json& j, std::shared_ptr<const Signature> source,
                                     std::shared_ptr<const Signature> target) {
  const std::string what = "translation";
  auto src = detail::field<std::string>(j, "source", what);
  auto tgt = detail::field<std::string>(j, "target", what);
  if (src != source->name() || tgt != target->name())
    throw ConfigError(what + " maps '" + src + "' to '" + tgt + "', but the languages given are '" +
                      source->name() + "' and '" + target->name() + "'");
  std::map<std::string, Term> images;
  for (const auto& [op, text] : detail::field<std::map<std::string, std::string>>(j, "heads", what))
    images.emplace(op, parse_term(*target, text));
  return HeadMap(std::move(source), std::move(target), std::move(images));
}

/// { "source", "target", "table": { "source term": "target term" } }
inline TableTranslation table_translation_from_json(const json& j, const Signature& source, const Signature& target) {
  const std::string what = "translation table";
  auto src = detail::field<std::string>(j, "source", what);
  auto tgt = detail::field<std::string>(j, "target", what);
  if (src != source.name() || tgt != target.name())
    throw ConfigError(what + " maps '" + src + "' to '" + tgt + "', but the signatures given are '" + source.name() +
                      "' and '" + target.name() + "'");
  std::vector<std::pair<Term, Term>> entries;
  for (const auto& [k, v] : detail::field<std::map<std::string, std::string>>(j, "table", what))
    entries.emplace_back(parse_term(source, k), parse_term(target, v));
  return TableTranslation(std::move(entries));
}

}  // namespace vtrans
