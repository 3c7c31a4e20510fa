#include "qrec/io.hpp"

#include <fstream>
#include <sstream>

namespace qrec::io {

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void fail(const std::string& msg) { throw ParseError(kModule, msg); }

Complex parse_entry(const Json& e, const std::string& where) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
    return {e[0].get<double>(), e[1].get<double>()};
  }
  fail(where + ": expected a number or an [re, im] pair");
}

CMatrix parse_matrix(const Json& m, Index dim, const std::string& where) {
  if (!m.is_array()) fail(where + ": expected a list of rows");
  if (static_cast<Index>(m.size()) != dim) {
    fail(where + ": expected " + std::to_string(dim) + " rows, found " + std::to_string(m.size()));
  }
  CMatrix out(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    const Json& row = m[static_cast<std::size_t>(r)];
    const std::string rwhere = where + " row " + std::to_string(r);
    if (!row.is_array()) fail(rwhere + ": expected a list of entries");
    if (static_cast<Index>(row.size()) != dim) {
      fail(rwhere + ": expected " + std::to_string(dim) + " entries, found " + std::to_string(row.size()));
    }
    for (Index c = 0; c < dim; ++c) {
      out(r, c) = parse_entry(row[static_cast<std::size_t>(c)], rwhere + " col " + std::to_string(c));
    }
  }
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("malformed document: ") + e.what());
  }
}

Tolerances parse_tolerances(const Json& doc) {
  Tolerances tol;
  if (!doc.contains("tolerances")) return tol;
  const Json& t = doc["tolerances"];
  if (!t.is_object()) fail("tolerances: expected an object");
  for (const auto& [key, value] : t.items()) {
    if (!value.is_number()) fail("tolerances." + key + ": expected a number");
    if (key == "rank_cut") {
      tol.rank_cut = value.get<double>();
    } else if (key == "eq_tol") {
      tol.eq_tol = value.get<double>();
    } else {
      fail("tolerances: unknown field '" + key + "'");
    }
  }
  return tol;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ChannelSpec parse_channel_spec(const std::string& text, const Tolerances* override_tol) {
  const Json doc = parse_json(text);
  if (!doc.is_object()) fail("channel spec: expected an object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) fail("dim: expected an integer");
  const Index dim = doc["dim"].get<Index>();
  if (dim < 1) fail("dim: must be positive");
  if (!doc.contains("kraus") || !doc["kraus"].is_array()) fail("kraus: expected a list of matrices");
  std::vector<CMatrix> kraus;
  for (std::size_t i = 0; i < doc["kraus"].size(); ++i) {
    kraus.push_back(parse_matrix(doc["kraus"][i], dim, "kraus[" + std::to_string(i) + "]"));
  }
  std::string label;
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) fail("label: expected a string");
    label = doc["label"].get<std::string>();
  }
  Tolerances tol = override_tol ? *override_tol : parse_tolerances(doc);
  tol.validate();
  return {QuantumChannel::validate(std::move(kraus), dim, tol), label};
}

ChannelSpec load_channel_spec(const std::string& path, const Tolerances* override_tol) {
  return parse_channel_spec(read_file(path), override_tol);
}

Json channel_spec_json(const QuantumChannel& channel, const std::string& label) {
  Json doc;
  doc["dim"] = channel.dim();
  if (!label.empty()) doc["label"] = label;
  doc["tolerances"] = tolerances_json(channel.tol());
  Json kraus = Json::array();
  for (const CMatrix& b : channel.kraus()) kraus.push_back(matrix_json(b));
  doc["kraus"] = std::move(kraus);
  return doc;
}

ClassicalChain parse_chain(const std::string& text, const Tolerances& tol) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      if (out.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line(line)) fail("chain file is empty");
  Index n = 0;
  {
    std::istringstream ls(line);
    std::string extra;
    if (!(ls >> n) || (ls >> extra) || n < 1) fail("line " + std::to_string(lineno) + ": expected a positive state count");
  }
  RMatrix p(n, n);
  for (Index x = 0; x < n; ++x) {
    if (!next_line(line)) fail("expected " + std::to_string(n) + " rows, found " + std::to_string(x));
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail("line " + std::to_string(lineno) + ": cannot parse '" + tok + "' as a number");
      }
    }
    if (static_cast<Index>(row.size()) != n) {
      fail("line " + std::to_string(lineno) + ": expected " + std::to_string(n) + " entries, found " +
           std::to_string(row.size()));
    }
    for (Index y = 0; y < n; ++y) p(x, y) = row[static_cast<std::size_t>(y)];
  }
  if (next_line(line)) fail("line " + std::to_string(lineno) + ": unexpected content after " + std::to_string(n) + " rows");
  return ClassicalChain::validate(p, {}, tol);
}

ClassicalChain load_chain(const std::string& path, const Tolerances& tol) { return parse_chain(read_file(path), tol); }

Subspace parse_frame(const std::string& text, const Tolerances& tol) {
  const Json doc = parse_json(text);
  if (!doc.is_object()) fail("frame: expected an object");
  if (!doc.contains("ambient_dim") || !doc["ambient_dim"].is_number_integer()) fail("ambient_dim: expected an integer");
  const Index n = doc["ambient_dim"].get<Index>();
  if (n < 1) fail("ambient_dim: must be positive");
  if (!doc.contains("vectors") || !doc["vectors"].is_array()) fail("vectors: expected a list of vectors");
  const Json& vs = doc["vectors"];
  if (vs.empty()) return Subspace(n);
  CMatrix frame(n, static_cast<Index>(vs.size()));
  for (std::size_t k = 0; k < vs.size(); ++k) {
    const std::string where = "vectors[" + std::to_string(k) + "]";
    if (!vs[k].is_array() || static_cast<Index>(vs[k].size()) != n) {
      fail(where + ": expected " + std::to_string(n) + " entries");
    }
    for (Index i = 0; i < n; ++i) {
      frame(i, static_cast<Index>(k)) = parse_entry(vs[k][static_cast<std::size_t>(i)], where + " entry " + std::to_string(i));
    }
  }
  return Subspace::span(frame, tol.rank_cut);
}

Subspace load_frame(const std::string& path, const Tolerances& tol) { return parse_frame(read_file(path), tol); }

Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json frame_json(const Subspace& s) {
  Json doc;
  doc["ambient_dim"] = s.ambient_dim();
  doc["dim"] = s.dim();
  Json vs = Json::array();
  for (Index k = 0; k < s.dim(); ++k) {
    Json v = Json::array();
    for (Index i = 0; i < s.ambient_dim(); ++i) v.push_back(Json::array({s.frame()(i, k).real(), s.frame()(i, k).imag()}));
    vs.push_back(std::move(v));
  }
  doc["vectors"] = std::move(vs);
  return doc;
}

Json tolerances_json(const Tolerances& tol) {
  Json t;
  t["rank_cut"] = tol.rank_cut;
  t["eq_tol"] = tol.eq_tol;
  return t;
}

}  // namespace qrec::io
