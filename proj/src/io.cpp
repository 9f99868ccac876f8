#include "bpqm/io.hpp"

#include <fstream>
#include <map>

namespace bpqm::io {

json matrix_to_json(const gf2::BitMatrix& m) {
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m.get(r, c) ? 1 : 0);
    data.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

gf2::BitMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    fail(Errc::BadInput, "matrix JSON needs rows/cols/data");
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<int>(data.size()) != rows)
    fail(Errc::BadInput, "matrix data row count mismatch");
  gf2::BitMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = data.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      fail(Errc::BadInput, "matrix data column count mismatch");
    for (int c = 0; c < cols; ++c) m.set(r, c, row.at(static_cast<std::size_t>(c)).get<int>() & 1);
  }
  return m;
}

json dist_to_json(const dist::Distribution& d) {
  return json{{"m", d.m}, {"probs", d.probs}};
}

dist::Distribution dist_from_json(const json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("probs"))
    fail(Errc::BadInput, "distribution JSON needs m/probs");
  return dist::Distribution::validated(j.at("m").get<int>(), j.at("probs").get<std::vector<double>>());
}

json mpg_to_json(const mpg::Mpg& g) {
  json edges = json::array();
  for (int e = 0; e < g.edge_count(); ++e) edges.push_back(json{{"id", e}, {"n", g.width(e)}});
  json nodes = json::array();
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    nodes.push_back(json{{"id", static_cast<int>(v)},
                         {"in_edge", g.nodes[v].in_edge},
                         {"out_edges", g.nodes[v].out_edges},
                         {"G", matrix_to_json(g.nodes[v].g)}});
  }
  return json{{"edges", std::move(edges)},
              {"nodes", std::move(nodes)},
              {"root", g.root_edge},
              {"leaves", g.leaf_edges}};
}

mpg::Mpg mpg_from_json(const json& j) {
  if (!j.is_object() || !j.contains("edges") || !j.contains("nodes") || !j.contains("root") ||
      !j.contains("leaves"))
    fail(Errc::BadInput, "MPG JSON needs edges/nodes/root/leaves");
  mpg::Mpg g;
  std::map<long long, int> id_map;
  for (const auto& e : j.at("edges")) {
    const long long id = e.at("id").get<long long>();
    if (id_map.count(id)) fail(Errc::BadInput, "duplicate edge id");
    id_map[id] = g.add_edge(e.at("n").get<int>());
  }
  auto map_id = [&](long long id) {
    const auto it = id_map.find(id);
    if (it == id_map.end()) fail(Errc::BadInput, "unknown edge id " + std::to_string(id));
    return it->second;
  };
  for (const auto& v : j.at("nodes")) {
    std::vector<int> outs;
    for (const auto& e : v.at("out_edges")) outs.push_back(map_id(e.get<long long>()));
    g.add_node(map_id(v.at("in_edge").get<long long>()), std::move(outs),
               matrix_from_json(v.at("G")));
  }
  g.root_edge = map_id(j.at("root").get<long long>());
  for (const auto& e : j.at("leaves")) g.leaf_edges.push_back(map_id(e.get<long long>()));
  return g;
}

json trellis_to_json(const graphs::Trellis& t) {
  json sections = json::array();
  for (const auto& sec : t.sections) {
    json edges = json::array();
    for (const auto& e : sec)
      edges.push_back(json{{"from", e.from}, {"to", e.to}, {"label", static_cast<int>(e.label)}});
    sections.push_back(std::move(edges));
  }
  return json{{"vertex_counts", t.vertex_counts}, {"sections", std::move(sections)}};
}

gf2::BitMatrix CodeInput::generator() const {
  if (g) return *g;
  if (h) return gf2::kernel_basis(*h);
  fail(Errc::BadInput, "code input holds neither G nor H");
}

CodeInput code_from_json(const json& j) {
  CodeInput c;
  if (j.contains("H")) c.h = matrix_from_json(j.at("H"));
  if (j.contains("G")) c.g = matrix_from_json(j.at("G"));
  if (!c.h && !c.g) fail(Errc::BadInput, "code JSON needs H or G");
  return c;
}

graphs::ConvCodeSpec conv_spec_from_json(const json& j) {
  if (!j.contains("p_octal") || !j.contains("q_octal"))
    fail(Errc::BadInput, "convolutional family JSON needs p_octal/q_octal");
  return graphs::ConvCodeSpec{j.at("p_octal").get<std::string>(), j.at("q_octal").get<std::string>()};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::BadInput, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::BadInput, path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(Errc::BadInput, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

std::vector<dist::Distribution> dist_list_from_json(const json& j) {
  if (!j.is_array()) fail(Errc::BadInput, "expected a JSON array of distributions");
  std::vector<dist::Distribution> out;
  for (const auto& d : j) out.push_back(dist_from_json(d));
  return out;
}

}  // namespace bpqm::io
