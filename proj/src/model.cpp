#include "ishap/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ishap/errors.hpp"
#include "ishap/external.hpp"

namespace ishap {

namespace {

// Whole-string double parse; rejects partial consumption and non-finite values.
double parse_cell(const std::string& text, int row, int col) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0') || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "csv: row " << row << ", column " << col << ": not a finite number: '" << text << "'";
    throw ParseError(msg.str());
  }
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

Dataset load_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: empty input");
  Dataset data;
  for (auto& name : split_line(strip_cr(line))) data.columns.push_back(name);
  if (data.columns.empty()) throw ParseError("csv: header has no columns");
  const int d = static_cast<int>(data.columns.size());

  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) {
      if (in.peek() == EOF) break;  // tolerate one trailing newline
      throw ParseError("csv: blank row " + std::to_string(rows + 1));
    }
    auto cells = split_line(line);
    if (static_cast<int>(cells.size()) != d)
      throw ParseError("csv: row " + std::to_string(rows + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " + std::to_string(d));
    for (int j = 0; j < d; ++j) values.push_back(parse_cell(cells[static_cast<std::size_t>(j)], rows + 1, j));
    ++rows;
  }
  if (rows < 2) throw ParseError("csv: need at least 2 data rows, got " + std::to_string(rows));
  data.rows.resize(rows, d);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < d; ++j) data.rows(i, j) = values[static_cast<std::size_t>(i) * d + j];
  return data;
}

Dataset load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open " + path);
  try {
    return load_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t j = 0; j < data.columns.size(); ++j) {
    if (j) out << ',';
    out << data.columns[j];
  }
  out << '\n';
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.d(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", data.rows(i, j));
      out << buf;
    }
    out << '\n';
  }
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(std::string("model: missing field '") + name + "'");
  return *it;
}

Eigen::VectorXd parse_vector(const nlohmann::json& arr, const char* what) {
  if (!arr.is_array()) throw ParseError(std::string("model: '") + what + "' must be an array");
  Eigen::VectorXd v(arr.size());
  Eigen::Index k = 0;
  for (const auto& e : arr) {
    if (!e.is_number()) throw ParseError(std::string("model: '") + what + "' must hold numbers");
    v[k++] = e.get<double>();
  }
  return v;
}

}  // namespace

ModelSpec parse_model_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("model: document must be a JSON object");
  std::string type = require_field(doc, "type").get<std::string>();
  ModelSpec spec;
  if (type == "linear") {
    spec.kind = ModelSpec::Kind::Linear;
    spec.weights = parse_vector(require_field(doc, "weights"), "weights");
    spec.intercept = require_field(doc, "intercept").get<double>();
    spec.d = static_cast<int>(spec.weights.size());
    if (spec.d == 0) throw ParseError("model: linear needs at least one weight");
  } else if (type == "gam") {
    spec.kind = ModelSpec::Kind::Gam;
    spec.d = require_field(doc, "d").get<int>();
    if (spec.d <= 0) throw ParseError("model: gam needs d >= 1");
    const auto& terms = require_field(doc, "terms");
    if (!terms.is_array()) throw ParseError("model: 'terms' must be an array");
    for (const auto& t : terms) {
      GamTerm term;
      std::string kind = require_field(t, "kind").get<std::string>();
      if (kind == "product")
        term.kind = GamTerm::Kind::Product;
      else if (kind == "sine")
        term.kind = GamTerm::Kind::Sine;
      else
        throw ParseError("model: unknown term kind '" + kind + "'");
      for (const auto& f : require_field(t, "features")) {
        int idx = f.get<int>();
        if (idx < 0 || idx >= spec.d)
          throw ParseError("model: term feature " + std::to_string(idx) + " out of range");
        term.features.push_back(idx);
      }
      term.coeffs = parse_vector(require_field(t, "coeffs"), "coeffs");
      if (term.features.empty() || term.coeffs.size() != static_cast<Eigen::Index>(term.features.size()))
        throw ParseError("model: term features/coeffs must be non-empty and aligned");
      spec.terms.push_back(std::move(term));
    }
  } else if (type == "external") {
    spec.kind = ModelSpec::Kind::External;
    spec.cmd = require_field(doc, "cmd").get<std::string>();
    if (auto it = doc.find("args"); it != doc.end())
      for (const auto& a : *it) spec.args.push_back(a.get<std::string>());
    spec.d = require_field(doc, "d").get<int>();
    if (spec.d <= 0) throw ParseError("model: external needs d >= 1");
    if (spec.cmd.empty()) throw ParseError("model: external needs a command");
  } else {
    throw ParseError("model: unknown type '" + type + "'");
  }
  return spec;
}

ModelSpec load_model_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("model: cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    return parse_model_spec(doc);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

nlohmann::ordered_json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json doc;
  switch (spec.kind) {
    case ModelSpec::Kind::Linear: {
      doc["type"] = "linear";
      doc["weights"] = std::vector<double>(spec.weights.begin(), spec.weights.end());
      doc["intercept"] = spec.intercept;
      break;
    }
    case ModelSpec::Kind::Gam: {
      doc["type"] = "gam";
      doc["d"] = spec.d;
      doc["terms"] = nlohmann::ordered_json::array();
      for (const auto& t : spec.terms) {
        nlohmann::ordered_json jt;
        jt["features"] = t.features;
        jt["kind"] = t.kind == GamTerm::Kind::Product ? "product" : "sine";
        jt["coeffs"] = std::vector<double>(t.coeffs.begin(), t.coeffs.end());
        doc["terms"].push_back(std::move(jt));
      }
      break;
    }
    case ModelSpec::Kind::External: {
      doc["type"] = "external";
      doc["cmd"] = spec.cmd;
      doc["args"] = spec.args;
      doc["d"] = spec.d;
      break;
    }
  }
  return doc;
}

Model::Model(ModelSpec spec)
    : spec_(std::move(spec)), evaluations_(std::make_shared<std::atomic<std::int64_t>>(0)) {
  if (spec_.kind == ModelSpec::Kind::External)
    external_ = std::make_shared<ExternalPredictor>(spec_.cmd, spec_.args);
}

std::int64_t Model::evaluation_count() const { return evaluations_->load(); }

Eigen::VectorXd Model::evaluate(const Eigen::MatrixXd& points) const {
  if (points.cols() != spec_.d)
    throw ParseError("model: points have " + std::to_string(points.cols()) +
                     " columns, model expects " + std::to_string(spec_.d));
  const Eigen::Index b = points.rows();
  evaluations_->fetch_add(b);
  switch (spec_.kind) {
    case ModelSpec::Kind::Linear: {
      // Sequential accumulation in index order; mirrors the reference
      // predictor so external round trips reproduce bit for bit.
      Eigen::VectorXd out(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        double acc = spec_.intercept;
        for (int j = 0; j < spec_.d; ++j) acc += spec_.weights[j] * points(i, j);
        out[i] = acc;
      }
      return out;
    }
    case ModelSpec::Kind::Gam: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(b);
      for (const auto& term : spec_.terms) {
        if (term.kind == GamTerm::Kind::Product) {
          Eigen::ArrayXd prod = Eigen::ArrayXd::Constant(b, 1.0);
          for (std::size_t k = 0; k < term.features.size(); ++k)
            prod *= term.coeffs[static_cast<Eigen::Index>(k)] *
                    points.col(term.features[k]).array();
          out.array() += prod;
        } else {
          Eigen::ArrayXd arg = Eigen::ArrayXd::Zero(b);
          for (std::size_t k = 0; k < term.features.size(); ++k)
            arg += term.coeffs[static_cast<Eigen::Index>(k)] *
                   points.col(term.features[k]).array();
          out.array() += arg.sin();
        }
      }
      return out;
    }
    case ModelSpec::Kind::External:
      return external_->predict(points);
  }
  throw ParseError("model: unreachable kind");
}

double Model::evaluate_one(const Eigen::VectorXd& point) const {
  return evaluate(point.transpose())[0];
}

namespace {

double background_mean(const Model& model, const Dataset& background) {
  if (background.n() == 0) throw ParseError("center: empty background");
  if (background.d() != model.dim())
    throw ParseError("center: background has " + std::to_string(background.d()) +
                     " columns, model expects " + std::to_string(model.dim()));
  Eigen::VectorXd out = model.evaluate(background.rows);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < out.size(); ++i) sum += out[i];
  return sum / static_cast<double>(out.size());
}

}  // namespace

CenteredModel center(const Model& model, const Dataset& background) {
  return CenteredModel(model, background_mean(model, background));
}

CenteredModel center(const CenteredModel& model, const Dataset& background) {
  return CenteredModel(model.inner(), background_mean(model.inner(), background));
}

}  // namespace ishap
