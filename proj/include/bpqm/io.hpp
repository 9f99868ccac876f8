#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bpqm/de.hpp"
#include "bpqm/dist.hpp"
#include "bpqm/gf2.hpp"
#include "bpqm/graphs.hpp"
#include "bpqm/mpg.hpp"

// JSON serialization of the on-disk formats:
//   matrix        {"rows": k, "cols": n, "data": [[0,1,...], ...]}
//   distribution  {"m": m, "probs": [...]}
//   mpg           {"edges": [{"id","n"},...], "nodes": [{"id","in_edge",
//                  "out_edges":[...], "G": matrix},...], "root": id,
//                  "leaves": [ids]}
//   code          {"H": matrix} and/or {"G": matrix}
//   trellis       {"vertex_counts": [...], "sections": [[{"from","to","label"},...],...]}
//   conv family   {"p_octal": "13", "q_octal": "15"}

namespace bpqm::io {

using nlohmann::json;

json matrix_to_json(const gf2::BitMatrix& m);
gf2::BitMatrix matrix_from_json(const json& j);

json dist_to_json(const dist::Distribution& d);
dist::Distribution dist_from_json(const json& j);

json mpg_to_json(const mpg::Mpg& g);
mpg::Mpg mpg_from_json(const json& j);

json trellis_to_json(const graphs::Trellis& t);

struct CodeInput {
  std::optional<gf2::BitMatrix> h;
  std::optional<gf2::BitMatrix> g;

  /// Generator matrix: G when given, else the kernel basis of H.
  gf2::BitMatrix generator() const;
};
CodeInput code_from_json(const json& j);

graphs::ConvCodeSpec conv_spec_from_json(const json& j);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

std::vector<dist::Distribution> dist_list_from_json(const json& j);

}  // namespace bpqm::io
