#pragma once

// Experiment configuration: flat key=value files, the space mini-grammar, and
// loaders for the on-disk formats (finite matrices, trees, measures, torus
// functions, quadratic forms, graphs, partitions, embeddings).
//
// Config grammar: one "key=value" per line, "#" starts a comment, blank lines
// ignored.  Every parse error carries its line number.  CLI flags override
// file values by re-assigning keys after the file is read.
//
// Space mini-grammar:
//   l<p>:<dim>              e.g. l2:4, linf:3 (p = inf)
//   finite:<matrix file>
//   tree:<tree file>
//   snow:<theta>:<inner spec>
//   wass:<p>:<matrix file>
//   union:<spec>,<spec>[,...]
//   pyth:<spec>,<spec>[,...]
// Commas split arguments at the top nesting level only, so cluster specs may
// themselves be snow:/wass: forms; nested union/pyth inside union/pyth is
// rejected to keep the grammar unambiguous.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/graphgap.hpp"
#include "cotype/measure.hpp"
#include "cotype/point.hpp"
#include "cotype/space.hpp"
#include "cotype/torus.hpp"

namespace cotype {

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": expected a number, got \"" + s + "\"");
  }
  if (used != t.size()) throw UsageError(what + ": trailing junk in \"" + s + "\"");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw UsageError(what + ": expected an integer, got \"" + s + "\"");
  }
  if (used != t.size()) throw UsageError(what + ": trailing junk in \"" + s + "\"");
  return v;
}

inline std::vector<double> parse_number_row(const std::string& line, const std::string& what) {
  // Accepts comma- or whitespace-separated decimals.
  std::string norm = line;
  for (char& c : norm) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(norm);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, what));
  return out;
}

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open file: " + path);
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// File loaders
// ---------------------------------------------------------------------------

// Matrix file: first line N, then N rows of N comma-separated decimals.
inline std::shared_ptr<FiniteSpace> load_finite_space(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty matrix file");
  const long long n = detail::parse_int(line, path + ":1");
  if (n <= 0) throw UsageError(path + ": matrix size must be positive");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(detail::parse_number_row(t, path + ":" + std::to_string(lineno)));
    if (rows.back().size() != static_cast<std::size_t>(n)) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(n) +
                       " entries");
    }
  }
  if (rows.size() != static_cast<std::size_t>(n)) {
    throw UsageError(path + ": expected " + std::to_string(n) + " matrix rows, got " +
                     std::to_string(rows.size()));
  }
  return std::make_shared<FiniteSpace>(std::move(rows));
}

// Tree file: lines "u v length"; vertex names are arbitrary whitespace-free
// tokens, mapped to indices in order of first appearance.
inline std::shared_ptr<TreeSpace> load_tree_space(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::map<std::string, std::size_t> names;
  std::vector<TreeEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream row(t);
    std::string u, v, len;
    if (!(row >> u >> v >> len)) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected \"u v length\"");
    }
    std::string extra;
    if (row >> extra) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": trailing junk");
    }
    const auto id = [&](const std::string& name) {
      const auto [it, fresh] = names.emplace(name, names.size());
      (void)fresh;
      return it->second;
    };
    TreeEdge e;
    e.u = id(u);
    e.v = id(v);
    e.length = detail::parse_double(len, path + ":" + std::to_string(lineno));
    edges.push_back(e);
  }
  if (edges.empty()) throw UsageError(path + ": no edges");
  std::vector<std::string> ordered(names.size());
  for (const auto& [name, id] : names) ordered[id] = name;
  return std::make_shared<TreeSpace>(names.size(), std::move(edges), std::move(ordered));
}

// Interprets a numeric row as a point of the given backend: a single 0-based
// id for finite spaces, an (edge index, offset) pair for trees, a weight
// histogram for transport spaces, and plain coordinates otherwise.
inline Point point_for_space(const Space& space, std::vector<double> coords,
                             const std::string& where) {
  const std::string kind = space.kind();
  if (kind == "finite") {
    if (coords.size() != 1 || coords[0] < 0 || coords[0] != std::floor(coords[0])) {
      throw UsageError(where + ": finite-space points are a single point id");
    }
    return index_point(static_cast<std::size_t>(coords[0]));
  }
  if (kind == "tree") {
    if (coords.size() != 2 || coords[0] < 0 || coords[0] != std::floor(coords[0])) {
      throw UsageError(where + ": tree points are rows \"edge_index, offset\"");
    }
    return Point(TreePos{static_cast<std::size_t>(coords[0]), coords[1]});
  }
  if (kind == "wasserstein") {
    return Point(Histogram{std::move(coords)});
  }
  return vec_point(std::move(coords));
}

// Measure file: CSV rows "coords..., weight" for vector backends, or
// "point_id, weight" for finite backends (ids are 0-based indices).
inline Measure load_measure(const std::string& path, const Space& space) {
  auto in = detail::open_or_throw(path);
  std::vector<WeightedAtom> atoms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto nums = detail::parse_number_row(t, path + ":" + std::to_string(lineno));
    if (nums.size() < 2) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected coords and a weight");
    }
    const std::string where = path + ":" + std::to_string(lineno);
    WeightedAtom a;
    a.weight = nums.back();
    a.point = point_for_space(space, std::vector<double>(nums.begin(), nums.end() - 1), where);
    atoms.push_back(std::move(a));
  }
  if (atoms.empty()) throw UsageError(path + ": empty measure");
  return Measure::normalized(std::move(atoms));
}

// Torus function file: header "n m dim", then (2m)^n coordinate rows in
// lattice order (axis 0 fastest).
inline TorusFunction load_torus_function(const std::string& path, SpacePtr target,
                                         std::size_t expect_dim) {
  auto in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty torus function file");
  {
    const std::string t = detail::trim(line);
    std::istringstream head(t);
    long long n = 0, m = 0, dim = 0;
    if (!(head >> n >> m >> dim)) throw UsageError(path + ":1: expected header \"n m dim\"");
    if (n <= 0 || m <= 0 || dim <= 0) throw UsageError(path + ":1: header values must be positive");
    if (expect_dim != 0 && static_cast<std::size_t>(dim) != expect_dim) {
      throw UsageError(path + ":1: dimension " + std::to_string(dim) +
                       " does not match the target space (" + std::to_string(expect_dim) + ")");
    }
    TorusIndexer idx(static_cast<std::size_t>(n), 2 * static_cast<std::size_t>(m));
    std::vector<Point> vals;
    vals.reserve(idx.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string row = detail::trim(line);
      if (row.empty() || row[0] == '#') continue;
      auto nums = detail::parse_number_row(row, path + ":" + std::to_string(lineno));
      if (nums.size() != static_cast<std::size_t>(dim)) {
        throw UsageError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(dim) + " coordinates");
      }
      vals.push_back(vec_point(std::move(nums)));
    }
    if (vals.size() != idx.size()) {
      throw UsageError(path + ": expected " + std::to_string(idx.size()) + " value rows, got " +
                       std::to_string(vals.size()));
    }
    return TorusFunction(std::move(idx), std::move(target), std::move(vals));
  }
}

// Quadratic form file: n, then the n rows of A, then the n rows of B, CSV.
struct QuadraticForms {
  std::vector<std::vector<double>> a, b;
};

inline QuadraticForms load_quadratic_forms(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty quadratic file");
  const long long n = detail::parse_int(line, path + ":1");
  if (n <= 0) throw UsageError(path + ": size must be positive");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(detail::parse_number_row(t, path + ":" + std::to_string(lineno)));
    if (rows.back().size() != static_cast<std::size_t>(n)) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(n) +
                       " entries");
    }
  }
  if (rows.size() != 2 * static_cast<std::size_t>(n)) {
    throw UsageError(path + ": expected " + std::to_string(2 * n) + " rows (A then B)");
  }
  QuadraticForms q;
  q.a.assign(rows.begin(), rows.begin() + n);
  q.b.assign(rows.begin() + n, rows.end());
  return q;
}

// Graph file: first line "N d", then one "u v" edge per line.
inline RegularGraph load_graph(const std::string& path) {
  auto in = detail::open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path + ": empty graph file");
  std::istringstream head(detail::trim(line));
  long long n = 0, d = 0;
  if (!(head >> n >> d) || n <= 0 || d <= 0) {
    throw UsageError(path + ":1: expected header \"N d\"");
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream row(t);
    long long u = 0, v = 0;
    if (!(row >> u >> v) || u < 0 || v < 0) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected \"u v\"");
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
  }
  return RegularGraph(static_cast<std::size_t>(n), static_cast<std::size_t>(d),
                      std::move(edges));
}

// Partition file: one block label per line, one line per vertex.
inline Partition load_partition(const std::string& path, std::size_t vertices) {
  auto in = detail::open_or_throw(path);
  std::map<std::string, std::size_t> labels;
  std::vector<std::vector<std::size_t>> blocks;
  std::string line;
  std::size_t vertex = 0;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto [it, fresh] = labels.emplace(t, blocks.size());
    if (fresh) blocks.emplace_back();
    blocks[it->second].push_back(vertex);
    ++vertex;
  }
  if (vertex != vertices) {
    throw UsageError(path + ": expected " + std::to_string(vertices) + " labels, got " +
                     std::to_string(vertex));
  }
  Partition p;
  p.blocks = std::move(blocks);
  p.validate(vertices);
  return p;
}

// Embedding file: CSV rows "domain_index, coordinate list".
struct EmbeddingRows {
  std::vector<std::size_t> domain_index;
  std::vector<std::vector<double>> coords;
};

inline EmbeddingRows load_embedding_rows(const std::string& path) {
  auto in = detail::open_or_throw(path);
  EmbeddingRows out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto nums = detail::parse_number_row(t, path + ":" + std::to_string(lineno));
    if (nums.size() < 2) {
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected domain index and coordinates");
    }
    if (nums[0] < 0 || nums[0] != std::floor(nums[0])) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": domain index must be a"
                       " nonnegative integer");
    }
    out.domain_index.push_back(static_cast<std::size_t>(nums[0]));
    out.coords.emplace_back(nums.begin() + 1, nums.end());
    if (dim == 0) {
      dim = out.coords.back().size();
    } else if (out.coords.back().size() != dim) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": inconsistent coordinate count");
    }
  }
  if (out.domain_index.empty()) throw UsageError(path + ": empty embedding file");
  return out;
}

// ---------------------------------------------------------------------------
// Space mini-grammar
// ---------------------------------------------------------------------------

inline SpacePtr parse_space(const std::string& spec_in, int nesting = 0);

namespace detail {

inline std::vector<SpacePtr> parse_space_list(const std::string& args, int nesting) {
  std::vector<SpacePtr> parts;
  for (const std::string& piece : split(args, ',')) {
    const std::string t = trim(piece);
    if (t.rfind("union:", 0) == 0 || t.rfind("pyth:", 0) == 0) {
      throw UsageError("space grammar: union/pyth cannot be nested");
    }
    parts.push_back(parse_space(t, nesting + 1));
  }
  return parts;
}

}  // namespace detail

// Parses the space mini-grammar.  `nesting` guards against nested union/pyth.
inline SpacePtr parse_space(const std::string& spec_in, int nesting) {
  const std::string spec = detail::trim(spec_in);
  if (spec.empty()) throw UsageError("space grammar: empty spec");

  if (spec.rfind("finite:", 0) == 0) {
    return load_finite_space(spec.substr(7));
  }
  if (spec.rfind("tree:", 0) == 0) {
    return load_tree_space(spec.substr(5));
  }
  if (spec.rfind("snow:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw UsageError("space grammar: snow needs \"snow:<theta>:<inner>\"");
    }
    const double theta = detail::parse_double(rest.substr(0, colon), "snowflake exponent");
    return std::make_shared<SnowflakeSpace>(parse_space(rest.substr(colon + 1), nesting + 1),
                                            theta);
  }
  if (spec.rfind("wass:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) {
      throw UsageError("space grammar: wass needs \"wass:<p>:<matrix file>\"");
    }
    const double p = detail::parse_double(rest.substr(0, colon), "transport exponent");
    return std::make_shared<WassersteinSpace>(load_finite_space(rest.substr(colon + 1)), p);
  }
  if (spec.rfind("union:", 0) == 0) {
    if (nesting > 0) throw UsageError("space grammar: union/pyth cannot be nested");
    return std::make_shared<DisjointUnionSpace>(detail::parse_space_list(spec.substr(6), nesting));
  }
  if (spec.rfind("pyth:", 0) == 0) {
    if (nesting > 0) throw UsageError("space grammar: union/pyth cannot be nested");
    return std::make_shared<PythagoreanProductSpace>(
        detail::parse_space_list(spec.substr(5), nesting));
  }
  if (spec[0] == 'l') {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
      throw UsageError("space grammar: coordinate spaces are \"l<p>:<dim>\"");
    }
    const std::string ptxt = spec.substr(1, colon - 1);
    const double p = (ptxt == "inf") ? std::numeric_limits<double>::infinity()
                                     : detail::parse_double(ptxt, "lp exponent");
    const long long dim = detail::parse_int(spec.substr(colon + 1), "lp dimension");
    if (dim <= 0) throw UsageError("space grammar: dimension must be positive");
    return std::make_shared<LpSpace>(static_cast<std::size_t>(dim), p);
  }
  throw UsageError("space grammar: unrecognized spec \"" + spec + "\"");
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::vector<std::pair<std::string, std::string>> entries;  // insertion order

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return true;
    }
    return false;
  }

  std::optional<std::string> find(const std::string& key) const {
    const std::string* hit = nullptr;
    for (const auto& [k, v] : entries) {
      if (k == key) hit = &v;  // last assignment wins (flag overrides)
    }
    if (!hit) return std::nullopt;
    return *hit;
  }

  void set(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
  }

  std::string require(const std::string& key) const {
    const auto v = find(key);
    if (!v) throw UsageError("config: " + key + " required");
    return *v;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto v = find(key);
    return v ? *v : fallback;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto v = find(key);
    return v ? detail::parse_double(*v, "config key " + key) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto v = find(key);
    return v ? detail::parse_int(*v, "config key " + key) : fallback;
  }

  std::uint64_t get_seed() const {
    const auto v = find("seed");
    if (!v) return 1;
    try {
      return static_cast<std::uint64_t>(std::stoull(detail::trim(*v)));
    } catch (const std::exception&) {
      throw UsageError("config key seed: expected an unsigned integer");
    }
  }
};

// Keys understood anywhere in the toolkit; anything else is a config error.
inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "op",     "space",   "space2", "q",        "n",       "m",         "beta",
      "p",      "alpha",   "theta",  "seed",     "samples", "budget",    "restarts",
      "tol",    "edges",   "level",  "j",        "x",       "eps",       "function",
      "measure", "point",  "matrix", "graph",    "partition", "quadratic", "embedding",
      "kind",   "output",  "format", "strategy", "gamma",   "c",         "psi-dist",
      "max-support", "exhaustive-cap",
  };
  return keys;
}

inline void check_known_key(const std::string& key, std::size_t lineno) {
  for (const auto& k : known_config_keys()) {
    if (k == key) return;
  }
  const std::string where =
      lineno == 0 ? std::string("flag") : "config line " + std::to_string(lineno);
  throw UsageError(where + ": unknown key \"" + key + "\"");
}

inline ExperimentConfig load_config(const std::string& path) {
  auto in = detail::open_or_throw(path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    }
    check_known_key(key, lineno);
    if (value.empty()) {
      throw UsageError("config line " + std::to_string(lineno) + ": empty value for \"" + key +
                       "\"");
    }
    cfg.set(key, value);
  }
  return cfg;
}

}  // namespace cotype
