#include "socialgat/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "socialgat/errors.hpp"
#include "socialgat/io.hpp"

namespace socialgat::graph {

using nlohmann::json;

SocialGraph SocialGraph::from_edges(std::map<std::string, NodeMeta> nodes,
                                    std::span<const std::pair<std::string, std::string>> edges) {
  SocialGraph g;
  g.ids_.reserve(nodes.size());
  g.meta_.reserve(nodes.size());
  for (auto& [id, meta] : nodes) {
    if (meta.is_external && !meta.tweet_labels.empty()) {
      throw ParameterError("external user '" + id + "' cannot carry tweet labels");
    }
    std::sort(meta.tweet_labels.begin(), meta.tweet_labels.end());
    g.index_.emplace(id, g.ids_.size());
    g.ids_.push_back(id);
    g.meta_.push_back(std::move(meta));
  }
  g.adj_.assign(g.ids_.size(), {});
  for (const auto& [a, b] : edges) {
    const auto u = g.index_of(a);
    const auto v = g.index_of(b);
    if (!u || !v) {
      throw LookupError("edge (" + a + ", " + b + ") references an unknown node");
    }
    if (*u == *v) throw ParameterError("self-loop on '" + a + "' cannot be stored");
    g.adj_[*u].push_back(*v);
    g.adj_[*v].push_back(*u);
  }
  std::size_t directed = 0;
  for (auto& list : g.adj_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    directed += list.size();
  }
  g.edge_count_ = directed / 2;
  return g;
}

std::optional<std::size_t> SocialGraph::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SocialGraph::adjacent(std::size_t u, std::size_t v) const {
  const auto& list = adj_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<Edge> SocialGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t u = 0; u < adj_.size(); ++u) {
    for (std::size_t v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

bool SocialGraph::is_symmetric() const {
  for (std::size_t u = 0; u < adj_.size(); ++u) {
    for (std::size_t v : adj_[u]) {
      if (v >= adj_.size() || v == u || !adjacent(v, u)) return false;
    }
  }
  return true;
}

SocialGraph build_social_graph(const AuthorLabels& authors, std::span<const RetweetEvent> events,
                               std::size_t external_threshold) {
  if (authors.empty()) throw ParameterError("cannot build a social graph without authors");

  std::map<std::string, std::size_t> external_counts;
  for (const auto& e : events) {
    if (!authors.contains(e.retweeter) || authors.contains(e.retweeted)) continue;
    ++external_counts[e.retweeted];
  }

  std::map<std::string, NodeMeta> nodes;
  for (const auto& [id, labels] : authors) nodes[id] = NodeMeta{false, labels};
  for (const auto& [id, count] : external_counts) {
    if (count >= external_threshold) nodes[id] = NodeMeta{true, {}};
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : events) {
    if (!authors.contains(e.retweeter) || e.retweeter == e.retweeted) continue;
    if (!nodes.contains(e.retweeted)) continue;
    pairs.insert(std::minmax(e.retweeter, e.retweeted));
  }
  const std::vector<std::pair<std::string, std::string>> edges(pairs.begin(), pairs.end());
  return SocialGraph::from_edges(std::move(nodes), edges);
}

double density(std::size_t node_count, std::size_t edge_count) {
  if (node_count < 2) {
    throw StatisticError("density is undefined for fewer than 2 nodes");
  }
  const double n = static_cast<double>(node_count);
  return 2.0 * static_cast<double>(edge_count) / (n * (n - 1.0));
}

double density(const SocialGraph& g) { return density(g.node_count(), g.edge_count()); }

std::size_t connected_components(const SocialGraph& g) {
  std::vector<std::size_t> parent(g.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = g.node_count();
  for (const auto& [u, v] : g.edges()) {
    const std::size_t a = find(u), b = find(v);
    if (a != b) {
      parent[std::max(a, b)] = std::min(a, b);
      --components;
    }
  }
  return components;
}

namespace {

bool sorted_intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

}  // namespace

std::optional<double> homophily(const SocialGraph& g) {
  std::size_t eligible = 0, same = 0;
  for (const auto& [u, v] : g.edges()) {
    const auto& a = g.meta(u).tweet_labels;
    const auto& b = g.meta(v).tweet_labels;
    if (a.empty() || b.empty()) continue;
    ++eligible;
    same += sorted_intersect(a, b);
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(eligible);
}

GraphStats stats(const SocialGraph& g) {
  GraphStats s;
  s.node_count = g.node_count();
  s.edge_count = g.edge_count();
  if (s.node_count >= 2) s.density = density(g);
  s.component_count = connected_components(g);
  s.homophily = homophily(g);
  return s;
}

std::string format_stats(const GraphStats& s) {
  std::ostringstream out;
  out << "# nodes        " << s.node_count << "\n";
  out << "# edges        " << s.edge_count << "\n";
  out << "density        " << (s.density ? io::format_double(*s.density) : "undefined") << "\n";
  out << "# components   " << s.component_count << "\n";
  out << "homophily      " << (s.homophily ? io::format_double(*s.homophily) : "undefined")
      << "\n";
  return out.str();
}

EventParseResult read_retweet_events(const std::filesystem::path& path) {
  EventParseResult result;
  const auto lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(i + 1) + ": ";
    try {
      const json j = json::parse(line);
      if (!j.is_object() || !j.contains("retweeter") || !j.contains("retweeted") ||
          !j["retweeter"].is_string() || !j["retweeted"].is_string()) {
        result.errors.push_back(where + "expected {\"retweeter\": string, \"retweeted\": string}");
        continue;
      }
      result.events.push_back({j["retweeter"].get<std::string>(), j["retweeted"].get<std::string>()});
    } catch (const json::exception& e) {
      result.errors.push_back(where + e.what());
    }
  }
  return result;
}

void write_retweet_events(const std::filesystem::path& path, std::span<const RetweetEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += json{{"retweeter", e.retweeter}, {"retweeted", e.retweeted}}.dump();
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void write_graph(const SocialGraph& g, const std::filesystem::path& edge_list,
                 const std::filesystem::path& sidecar) {
  std::vector<std::string> lines;
  lines.reserve(g.edge_count());
  for (const auto& [u, v] : g.edges()) {
    const auto& a = g.id(u);
    const auto& b = g.id(v);
    for (const auto* id : {&a, &b}) {
      if (id->find_first_of(" \t\n") != std::string::npos) {
        throw ParameterError("node id '" + *id + "' contains whitespace");
      }
    }
    lines.push_back(a < b ? a + " " + b : b + " " + a);
  }
  std::sort(lines.begin(), lines.end());
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  io::write_file_atomic(edge_list, text);

  json nodes = json::object();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    nodes[g.id(i)] = {{"external", g.meta(i).is_external}, {"labels", g.meta(i).tweet_labels}};
  }
  const json doc = {{"schema_version", 1}, {"nodes", nodes}};
  io::write_file_atomic(sidecar, doc.dump(1) + "\n");
}

SocialGraph read_graph(const std::filesystem::path& edge_list,
                       const std::filesystem::path& sidecar) {
  json doc;
  try {
    doc = json::parse(io::read_file(sidecar));
  } catch (const json::exception& e) {
    throw ParseError(sidecar.string() + ": " + e.what());
  }
  std::map<std::string, NodeMeta> nodes;
  for (const auto& [id, m] : doc.at("nodes").items()) {
    nodes[id] = NodeMeta{m.at("external").get<bool>(),
                         m.at("labels").get<std::vector<std::size_t>>()};
  }
  std::vector<std::pair<std::string, std::string>> edges;
  const auto lines = io::read_lines(edge_list);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto parts = io::split_whitespace(lines[i]);
    if (parts.empty()) continue;
    if (parts.size() != 2) {
      throw ParseError(edge_list.string() + " line " + std::to_string(i + 1) +
                       ": expected 'u v'");
    }
    edges.emplace_back(std::string(parts[0]), std::string(parts[1]));
  }
  return SocialGraph::from_edges(std::move(nodes), edges);
}

}  // namespace socialgat::graph
