#include "ishap/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ishap/errors.hpp"

namespace ishap {

std::string format_g17(double v) {
  if (!std::isfinite(v)) throw ParseError("json: non-finite number");
  if (v == 0.0) return "0";  // normalize -0.0 so round trips stay byte-stable
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void dump_value(const nlohmann::ordered_json& v, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t k = 0;
      for (auto it = v.begin(); it != v.end(); ++it, ++k) {
        out += pad_in;
        out += nlohmann::ordered_json(it.key()).dump();
        out += ": ";
        dump_value(it.value(), out, depth + 1);
        if (k + 1 < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; nested structures get one
      // element per line.
      bool scalar = true;
      for (const auto& e : v)
        if (e.is_structured()) scalar = false;
      if (scalar) {
        out += '[';
        for (std::size_t k = 0; k < v.size(); ++k) {
          if (k) out += ", ";
          dump_value(v[k], out, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        out += pad_in;
        dump_value(v[k], out, depth + 1);
        if (k + 1 < v.size()) out += ',';
        out += '\n';
      }
      out += pad + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float:
      out += format_g17(v.get<double>());
      return;
    default:
      // Integers, booleans, strings, null: nlohmann's own stable rendering.
      out += v.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& doc) {
  std::string out;
  dump_value(doc, out, 0);
  out += '\n';
  return out;
}

nlohmann::ordered_json explanation_to_json(const Explanation& explanation) {
  nlohmann::ordered_json doc;
  doc["prediction"] = explanation.prediction;
  doc["baseline"] = explanation.baseline;
  doc["tolerance"] = explanation.tolerance;
  doc["parts"] = nlohmann::ordered_json::array();
  for (const auto& part : explanation.parts) {
    nlohmann::ordered_json jp;
    jp["features"] = part.features;
    jp["value"] = part.value;
    jp["individual_sum"] = part.individual_sum;
    jp["interaction_effect"] = part.interaction_effect;
    doc["parts"].push_back(std::move(jp));
  }
  doc["graph"] = nlohmann::ordered_json::object();
  doc["graph"]["edges"] = nlohmann::ordered_json::array();
  for (auto [i, j] : explanation.graph.edges()) {
    nlohmann::ordered_json edge = nlohmann::ordered_json::array();
    edge.push_back(i);
    edge.push_back(j);
    edge.push_back(explanation.graph.p_value(i, j));
    doc["graph"]["edges"].push_back(std::move(edge));
  }
  doc["partition"] = explanation.partition.parts;
  const ExplainParams& c = explanation.config;
  nlohmann::ordered_json jc;
  jc["alpha"] = c.alpha;
  jc["lambda"] = c.lambda;
  jc["n"] = c.n;
  jc["n_s"] = c.n_s;
  jc["mode"] = c.mode == SearchMode::Exact ? "exact" : "greedy";
  jc["regularizer"] = c.regularizer == Regularizer::Pairwise ? "pairwise" : "cardinality";
  jc["merge_rule"] = c.merge_rule == MergeRule::Edge ? "edge" : "path";
  jc["seed"] = c.seed;
  jc["lambda_autoscale"] = c.lambda_autoscale;
  jc["component_guard"] = c.component_guard;
  doc["config"] = std::move(jc);
  return doc;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw ParseError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ParseError("cannot rename " + tmp + " to " + path);
}

}  // namespace ishap
