#pragma once

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "kgtext/kg.hpp"
#include "kgtext/lingo.hpp"

namespace kgtext {

struct MissingFile : std::runtime_error {
  explicit MissingFile(const std::string& path) : std::runtime_error("missing file: " + path) {}
};

struct MalformedRecord : std::runtime_error {
  explicit MalformedRecord(const std::string& id, const std::string& why)
      : std::runtime_error("malformed record " + id + ": " + why) {}
};

// One graph-text pair in the JSONL interchange format:
//   {"id": ..., "split": ..., "graph": [[s,p,o],...], "texts": [...]}
struct PairRecord {
  std::string id;
  std::string split;  // train | val | test
  std::string image_id;  // grouping key for split logic; empty if N/A
  KnowledgeGraph graph;
  std::vector<std::string> texts;
};

inline nlohmann::json to_json(const PairRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["split"] = r.split;
  if (!r.image_id.empty()) j["image_id"] = r.image_id;
  auto& g = j["graph"] = nlohmann::json::array();
  for (const auto& f : r.graph.facts) g.push_back({f.subject, f.predicate, f.object});
  j["texts"] = r.texts;
  return j;
}

inline PairRecord pair_from_json(const nlohmann::json& j) {
  PairRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.split = j.value("split", "train");
    r.image_id = j.value("image_id", "");
    for (const auto& t : j.at("graph")) {
      if (!t.is_array() || t.size() != 3) throw MalformedRecord(r.id, "triple is not [s,p,o]");
      r.graph.facts.push_back({t[0].get<std::string>(), t[1].get<std::string>(),
                               t[2].get<std::string>()});
    }
    r.texts = j.at("texts").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(r.id.empty() ? "<unknown>" : r.id, e.what());
  }
  return r;
}

inline std::vector<PairRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  std::vector<PairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(path + ":" + std::to_string(lineno), e.what());
    }
    out.push_back(pair_from_json(j));
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<PairRecord>& records) {
  std::ofstream out(path);
  if (!out) throw MissingFile(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

// ---------------------------------------------------------------------------
// WebNLG v2.1 loader
// ---------------------------------------------------------------------------

// "birthPlace" -> "birth place": space at each lower->upper transition, then
// lowercase.
inline std::string resolve_camel_case(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isupper(c) && i > 0 &&
        std::islower(static_cast<unsigned char>(s[i - 1]))) {
      out += ' ';
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

inline std::string strip_underscores(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

namespace detail {

inline std::string xml_unescape(std::string s) {
  static const std::pair<const char*, const char*> ents[] = {
      {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}};
  for (auto [from, to] : ents) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, std::strlen(from), to);
      pos += std::strlen(to);
    }
  }
  return s;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// All inner text of <tag ...>...</tag> occurrences within `body`.
inline std::vector<std::string> tag_contents(const std::string& body, const std::string& tag) {
  std::vector<std::string> out;
  const std::string open = "<" + tag;
  const std::string close = "</" + tag + ">";
  std::size_t pos = 0;
  while ((pos = body.find(open, pos)) != std::string::npos) {
    std::size_t gt = body.find('>', pos);
    if (gt == std::string::npos) break;
    std::size_t end = body.find(close, gt);
    if (end == std::string::npos) break;
    out.push_back(trim(xml_unescape(body.substr(gt + 1, end - gt - 1))));
    pos = end + close.size();
  }
  return out;
}

inline std::string split_from_path(const std::filesystem::path& p) {
  std::string s = p.generic_string();
  if (s.find("train") != std::string::npos) return "train";
  if (s.find("dev") != std::string::npos || s.find("val") != std::string::npos) return "val";
  if (s.find("test") != std::string::npos) return "test";
  return "train";
}

}  // namespace detail

// Loads a local WebNLG v2.1 release: recursively scans `dir` for .xml files,
// takes splits from the file paths as provided (train/dev/test), resolves
// relation camel case, removes entity underscores, keeps triple order.
inline std::vector<PairRecord> load_webnlg(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) throw MissingFile(dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw MissingFile(dir + " (no .xml files)");

  std::vector<PairRecord> out;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    std::string split = detail::split_from_path(file);

    std::size_t pos = 0;
    std::size_t entry_no = 0;
    while ((pos = body.find("<entry", pos)) != std::string::npos) {
      std::size_t end = body.find("</entry>", pos);
      if (end == std::string::npos) break;
      std::string entry = body.substr(pos, end - pos);
      pos = end + 8;
      ++entry_no;

      std::string id = file.filename().string() + "#" + std::to_string(entry_no);
      auto eid_at = entry.find("eid=\"");
      if (eid_at != std::string::npos) {
        auto eid_end = entry.find('"', eid_at + 5);
        if (eid_end != std::string::npos) {
          id = file.filename().string() + "#" + entry.substr(eid_at + 5, eid_end - eid_at - 5);
        }
      }

      auto tripleset = detail::tag_contents(entry, "modifiedtripleset");
      if (tripleset.empty()) throw MalformedRecord(id, "no modifiedtripleset");
      PairRecord r;
      r.id = id;
      r.split = split;
      for (const auto& mt : detail::tag_contents(tripleset[0], "mtriple")) {
        std::vector<std::string> parts;
        std::size_t at = 0;
        while (true) {
          std::size_t bar = mt.find(" | ", at);
          if (bar == std::string::npos) {
            parts.push_back(detail::trim(mt.substr(at)));
            break;
          }
          parts.push_back(detail::trim(mt.substr(at, bar - at)));
          at = bar + 3;
        }
        if (parts.size() != 3) throw MalformedRecord(id, "mtriple is not s | p | o: " + mt);
        r.graph.facts.push_back({strip_underscores(parts[0]), resolve_camel_case(parts[1]),
                                 strip_underscores(parts[2])});
      }
      r.texts = detail::tag_contents(entry, "lex");
      if (r.graph.facts.empty() || r.texts.empty()) {
        throw MalformedRecord(id, "entry without triples or lexicalizations");
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Visual-Genome-style region graphs
// ---------------------------------------------------------------------------

struct RawObject {
  long long id = 0;
  std::string name;
  std::vector<std::string> attributes;
};

struct RawRelationship {
  long long subject_id = 0;
  std::string predicate;
  long long object_id = 0;
};

struct RawRegion {
  long long image_id = 0;
  long long region_id = 0;
  std::string description;
  std::vector<RawObject> objects;
  std::vector<RawRelationship> relationships;
};

// Parses the documented region-graph JSON: an array of images, each with a
// "regions" array. Object entries may use "names" (list) or "name"; missing
// attribute arrays are tolerated.
inline std::vector<RawRegion> load_vg_regions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(path, e.what());
  }
  std::vector<RawRegion> out;
  for (const auto& img : doc) {
    long long image_id = img.value("image_id", 0LL);
    for (const auto& reg : img.value("regions", nlohmann::json::array())) {
      RawRegion r;
      r.image_id = image_id;
      try {
        r.region_id = reg.value("region_id", 0LL);
        r.description = reg.value("phrase", reg.value("description", std::string()));
        for (const auto& obj : reg.value("objects", nlohmann::json::array())) {
          RawObject o;
          o.id = obj.value("object_id", 0LL);
          if (obj.contains("names") && !obj["names"].empty()) {
            o.name = obj["names"][0].get<std::string>();
          } else {
            o.name = obj.value("name", std::string());
          }
          for (const auto& a : obj.value("attributes", nlohmann::json::array())) {
            o.attributes.push_back(a.get<std::string>());
          }
          r.objects.push_back(std::move(o));
        }
        for (const auto& rel : reg.value("relationships", nlohmann::json::array())) {
          RawRelationship rr;
          rr.subject_id = rel.value("subject_id", 0LL);
          rr.object_id = rel.value("object_id", 0LL);
          rr.predicate = rel.value("predicate", std::string());
          r.relationships.push_back(std::move(rr));
        }
      } catch (const nlohmann::json::exception& e) {
        throw MalformedRecord("region " + std::to_string(r.region_id), e.what());
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

struct RegionConversion {
  std::vector<PairRecord> pairs;
  std::size_t dropped_empty = 0;  // regions with no facts
};

// One fact per relationship plus one (object, attr, attribute) fact per
// attribute; text is the region description. Empty-graph regions are dropped.
inline RegionConversion regions_to_instances(const std::vector<RawRegion>& regions) {
  RegionConversion out;
  for (const auto& reg : regions) {
    PairRecord r;
    r.id = std::to_string(reg.image_id) + ":" + std::to_string(reg.region_id);
    r.image_id = std::to_string(reg.image_id);
    std::unordered_map<long long, const RawObject*> by_id;
    for (const auto& o : reg.objects) by_id[o.id] = &o;
    for (const auto& rel : reg.relationships) {
      auto s = by_id.find(rel.subject_id);
      auto o = by_id.find(rel.object_id);
      if (s == by_id.end() || o == by_id.end()) {
        throw MalformedRecord(r.id, "relationship endpoint not declared");
      }
      if (s->second->name.empty() || rel.predicate.empty() || o->second->name.empty()) continue;
      r.graph.facts.push_back({s->second->name, rel.predicate, o->second->name});
    }
    for (const auto& obj : reg.objects) {
      for (const auto& a : obj.attributes) {
        if (obj.name.empty() || a.empty()) continue;
        r.graph.facts.push_back({obj.name, std::string(kAttr), a});
      }
    }
    if (r.graph.facts.empty() || reg.description.empty()) {
      ++out.dropped_empty;
      continue;
    }
    r.texts.push_back(reg.description);
    out.pairs.push_back(std::move(r));
  }
  return out;
}

struct SplitResult {
  std::vector<PairRecord> pairs;  // with split fields assigned
  std::size_t removed_from_train = 0;
};

// 80/10/10 split at image granularity, then remove train instances whose
// graph serialization also occurs in val or test.
inline SplitResult split_and_clean(std::vector<PairRecord> pairs, std::uint64_t seed) {
  std::vector<std::string> images;
  std::set<std::string> seen;
  for (const auto& p : pairs) {
    const std::string& key = p.image_id.empty() ? p.id : p.image_id;
    if (seen.insert(key).second) images.push_back(key);
  }
  Rng rng = substream(seed, "split");
  rng.shuffle(images);
  std::size_t n = images.size();
  std::size_t n_val = n / 10, n_test = n / 10;
  std::unordered_map<std::string, std::string> split_of;
  for (std::size_t i = 0; i < n; ++i) {
    split_of[images[i]] = i < n_val ? "val" : (i < n_val + n_test ? "test" : "train");
  }
  for (auto& p : pairs) {
    p.split = split_of[p.image_id.empty() ? p.id : p.image_id];
  }
  std::set<std::string> held_out;
  for (const auto& p : pairs) {
    if (p.split != "train") held_out.insert(join_ws(serialize(p.graph).tokens));
  }
  SplitResult res;
  for (auto& p : pairs) {
    if (p.split == "train" && held_out.count(join_ws(serialize(p.graph).tokens))) {
      ++res.removed_from_train;
      continue;
    }
    res.pairs.push_back(std::move(p));
  }
  return res;
}

enum class Direction { G2T, T2G };

struct UnifiedInstance {
  std::string id;
  std::string split;
  // G2T: source graph + text references; T2G: source text + graph references
  KnowledgeGraph graph;
  std::vector<std::string> texts;
  std::vector<KnowledgeGraph> graphs;
};

// Unify duplicates to multi-reference instances: group by exact serialization
// string (G2T) or exact text string (T2G); reference order = first seen.
inline std::vector<UnifiedInstance> unify_duplicates(const std::vector<PairRecord>& pairs,
                                                     Direction dir) {
  std::vector<UnifiedInstance> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;  // (split, key) -> slot
  for (const auto& p : pairs) {
    if (dir == Direction::G2T) {
      std::string key = join_ws(serialize(p.graph).tokens);
      auto [it, fresh] = index.try_emplace({p.split, key}, out.size());
      if (fresh) {
        out.push_back({p.id, p.split, p.graph, {}, {}});
      }
      auto& inst = out[it->second];
      for (const auto& t : p.texts) {
        if (std::find(inst.texts.begin(), inst.texts.end(), t) == inst.texts.end()) {
          inst.texts.push_back(t);
        }
      }
    } else {
      for (const auto& t : p.texts) {
        auto [it, fresh] = index.try_emplace({p.split, t}, out.size());
        if (fresh) {
          UnifiedInstance inst;
          inst.id = p.id;
          inst.split = p.split;
          inst.texts.push_back(t);
          out.push_back(std::move(inst));
        }
        auto& inst = out[it->second];
        bool dup = false;
        for (const auto& g : inst.graphs) {
          if (fact_multiset_equal(g, p.graph)) {
            dup = true;
            break;
          }
        }
        if (!dup) inst.graphs.push_back(p.graph);
      }
    }
  }
  return out;
}

// Keep every region of every image where some fact mentions an object whose
// final whitespace token ends with "ball" (case-insensitive suffix).
inline std::vector<PairRecord> vg_ball_filter(const std::vector<PairRecord>& pairs) {
  auto ends_with_ball = [](const std::string& label) {
    auto toks = split_ws(label);
    if (toks.empty()) return false;
    std::string last = lower_ascii(toks.back());
    return last.size() >= 4 && last.compare(last.size() - 4, 4, "ball") == 0;
  };
  std::unordered_set<std::string> keep_images;
  for (const auto& p : pairs) {
    for (const auto& f : p.graph.facts) {
      if (ends_with_ball(f.subject) || ends_with_ball(f.object)) {
        keep_images.insert(p.image_id.empty() ? p.id : p.image_id);
        break;
      }
    }
  }
  std::vector<PairRecord> out;
  for (const auto& p : pairs) {
    if (keep_images.count(p.image_id.empty() ? p.id : p.image_id)) out.push_back(p);
  }
  return out;
}

struct CorpusStats {
  std::map<std::string, std::size_t> split_sizes;
  std::size_t relation_types = 0;
  double avg_facts_per_graph = 0;
  double avg_tokens_per_text = 0;
  double avg_pct_text_tokens_in_graph = 0;
  double avg_pct_graph_tokens_in_text = 0;
};

inline CorpusStats corpus_stats(const std::vector<PairRecord>& pairs) {
  CorpusStats st;
  std::set<std::string> relations;
  double facts = 0, tokens = 0, t_in_g = 0, g_in_t = 0;
  std::size_t n_texts = 0, n_overlap = 0;
  for (const auto& p : pairs) {
    ++st.split_sizes[p.split];
    facts += static_cast<double>(p.graph.facts.size());
    std::set<std::string> graph_tokens;
    for (const auto& f : p.graph.facts) {
      relations.insert(lower_ascii(f.predicate));
      for (const auto* label : {&f.subject, &f.predicate, &f.object}) {
        for (const auto& t : split_ws(*label)) graph_tokens.insert(lower_ascii(t));
      }
    }
    for (const auto& text : p.texts) {
      auto toks = split_ws(text);
      tokens += static_cast<double>(toks.size());
      ++n_texts;
      if (toks.empty() || graph_tokens.empty()) continue;
      std::set<std::string> text_tokens;
      for (const auto& t : toks) text_tokens.insert(lower_ascii(t));
      std::size_t shared = 0;
      for (const auto& t : text_tokens) shared += graph_tokens.count(t);
      t_in_g += 100.0 * static_cast<double>(shared) / static_cast<double>(text_tokens.size());
      std::size_t shared_g = 0;
      for (const auto& t : graph_tokens) shared_g += text_tokens.count(t);
      g_in_t += 100.0 * static_cast<double>(shared_g) / static_cast<double>(graph_tokens.size());
      ++n_overlap;
    }
  }
  st.relation_types = relations.size();
  if (!pairs.empty()) st.avg_facts_per_graph = facts / static_cast<double>(pairs.size());
  if (n_texts) st.avg_tokens_per_text = tokens / static_cast<double>(n_texts);
  if (n_overlap) {
    st.avg_pct_text_tokens_in_graph = t_in_g / static_cast<double>(n_overlap);
    st.avg_pct_graph_tokens_in_text = g_in_t / static_cast<double>(n_overlap);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Synthetic corpus (desk-scale harness)
// ---------------------------------------------------------------------------

struct SynthSpec {
  std::size_t n_entities = 20;
  std::size_t n_relations = 5;
  std::size_t n_attributes = 8;
  std::size_t n_instances = 500;
  std::size_t min_facts = 1;
  std::size_t max_facts = 3;
  std::size_t n_templates = 2;  // lexical variation
  // fraction of relation clauses whose object carries an inline adjective
  // ("the man holds the red ball"); these defeat the rule heuristics, so the
  // corpus leaves headroom above the rule baselines
  double p_adorn = 0.35;
};

namespace detail {

// Single-token vocab aligned with the bundled lexicon so the rule systems
// behave well on the generated texts.
inline const std::vector<std::string>& synth_nouns() {
  static const std::vector<std::string> v = {
      "man",  "woman", "dog",   "cat",  "ball",  "hat",    "shirt", "car",
      "bird", "horse", "table", "girl", "boy",   "house",  "tree",  "bike",
      "cup",  "plate", "chair", "bench"};
  return v;
}
inline const std::vector<std::string>& synth_verbs() {
  static const std::vector<std::string> v = {"holds", "rides", "pulls", "touches", "throws",
                                             "kicks", "carries", "pushes"};
  return v;
}
inline const std::vector<std::string>& synth_adjectives() {
  static const std::vector<std::string> v = {"red",   "blue",  "green", "small", "big",
                                             "white", "black", "yellow", "old",  "new"};
  return v;
}

}  // namespace detail

// Random small graphs verbalized by fixed templates. Relation facts come
// first, then attribute facts rendered prenominally ("the red ball") so the
// rule heuristics recover them.
inline std::vector<PairRecord> synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  const auto& nouns = detail::synth_nouns();
  const auto& verbs = detail::synth_verbs();
  const auto& adjs = detail::synth_adjectives();
  const std::size_t ne = std::min(spec.n_entities, nouns.size());
  const std::size_t nr = std::min(spec.n_relations, verbs.size());
  const std::size_t na = std::min(spec.n_attributes, adjs.size());

  Rng rng = substream(seed, "synth");
  std::vector<PairRecord> out;
  out.reserve(spec.n_instances);
  for (std::size_t i = 0; i < spec.n_instances; ++i) {
    PairRecord r;
    r.id = "synth-" + std::to_string(i);
    std::size_t n_facts =
        spec.min_facts + rng.uniform_int(spec.max_facts - spec.min_facts + 1);
    std::size_t tmpl = rng.uniform_int(std::max<std::size_t>(1, spec.n_templates));
    const char* det = tmpl == 0 ? "the" : "a";

    std::vector<std::string> rel_clauses, attr_clauses;
    std::set<Fact> used;
    KnowledgeGraph rel_facts, attr_facts;
    for (std::size_t k = 0; k < n_facts; ++k) {
      if (rng.bernoulli(0.5)) {
        std::string s = nouns[rng.uniform_int(ne)];
        std::string o = nouns[rng.uniform_int(ne)];
        while (o == s) o = nouns[rng.uniform_int(ne)];
        std::string p = verbs[rng.uniform_int(nr)];
        Fact f{s, p, o};
        bool adorn = rng.bernoulli(spec.p_adorn);
        std::string a = adjs[rng.uniform_int(na)];
        Fact af{o, std::string(kAttr), a};
        if (adorn && (used.count(f) || used.count(af))) adorn = false;
        if (!adorn && !used.insert(f).second) continue;
        if (adorn) {
          used.insert(f);
          used.insert(af);
          rel_clauses.push_back(std::string(det) + " " + s + " " + p + " " + det + " " + a +
                                " " + o);
          attr_facts.facts.push_back(std::move(af));
        } else {
          rel_clauses.push_back(std::string(det) + " " + s + " " + p + " " + det + " " + o);
        }
        rel_facts.facts.push_back(std::move(f));
      } else {
        std::string s = nouns[rng.uniform_int(ne)];
        std::string a = adjs[rng.uniform_int(na)];
        Fact f{s, std::string(kAttr), a};
        if (!used.insert(f).second) continue;
        attr_clauses.push_back(std::string(det) + " " + a + " " + s);
        attr_facts.facts.push_back(std::move(f));
      }
    }
    if (rel_facts.facts.empty() && attr_facts.facts.empty()) {
      std::string s = nouns[rng.uniform_int(ne)];
      std::string a = adjs[rng.uniform_int(na)];
      attr_clauses.push_back(std::string(det) + " " + a + " " + s);
      attr_facts.facts.push_back({s, std::string(kAttr), a});
    }
    for (auto& f : rel_facts.facts) r.graph.facts.push_back(std::move(f));
    for (auto& f : attr_facts.facts) r.graph.facts.push_back(std::move(f));

    std::string text;
    for (const auto& clause : rel_clauses) {
      if (!text.empty()) text += " and ";
      text += clause;
    }
    for (const auto& clause : attr_clauses) {
      if (!text.empty()) text += " and ";
      text += clause;
    }
    r.texts.push_back(std::move(text));

    // deterministic 80/10/10 by index
    std::size_t mod = i % 10;
    r.split = mod == 8 ? "val" : (mod == 9 ? "test" : "train");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kgtext
