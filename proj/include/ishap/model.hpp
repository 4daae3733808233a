#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace ishap {

// Tabular sample: n finite rows over d named columns, n >= 2.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd rows;  // n x d

  int n() const { return static_cast<int>(rows.rows()); }
  int d() const { return static_cast<int>(rows.cols()); }
};

// CSV with a header line; every cell must parse as a finite double.
Dataset load_csv(std::istream& in);
Dataset load_csv_file(const std::string& path);
void write_csv(const Dataset& data, std::ostream& out);

// One additive term of a GAM: product of scaled features, or sine of their sum.
struct GamTerm {
  enum class Kind { Product, Sine };
  Kind kind = Kind::Product;
  std::vector<int> features;
  Eigen::VectorXd coeffs;  // aligned with features
};

// Declarative model description, loadable from JSON.
//   linear:   {"type":"linear","weights":[...],"intercept":w0}
//   gam:      {"type":"gam","d":d,"terms":[{"features":[...],"kind":"product"|"sine","coeffs":[...]}]}
//   external: {"type":"external","cmd":"...","args":[...],"d":d}
struct ModelSpec {
  enum class Kind { Linear, Gam, External };
  Kind kind = Kind::Linear;
  int d = 0;
  Eigen::VectorXd weights;
  double intercept = 0.0;
  std::vector<GamTerm> terms;
  std::string cmd;
  std::vector<std::string> args;
};

ModelSpec parse_model_spec(const nlohmann::json& doc);
ModelSpec load_model_spec_file(const std::string& path);
nlohmann::ordered_json model_spec_to_json(const ModelSpec& spec);

class ExternalPredictor;

// Black-box predictor over points of fixed dimension. Built-in kinds evaluate
// in-process; external forwards batches to a subprocess over the line
// protocol. Copies share the subprocess handle and the evaluation counter.
class Model {
 public:
  explicit Model(ModelSpec spec);

  int dim() const { return spec_.d; }
  const ModelSpec& spec() const { return spec_; }

  // points is b x d; returns b outputs in row order.
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;
  double evaluate_one(const Eigen::VectorXd& point) const;

  // Total points evaluated through this model (shared across copies).
  std::int64_t evaluation_count() const;

 private:
  ModelSpec spec_;
  std::shared_ptr<ExternalPredictor> external_;
  std::shared_ptr<std::atomic<std::int64_t>> evaluations_;
};

// Model with its background mean subtracted, so the all-features coalition is
// worth f(x) - baseline and the empty coalition is worth ~0.
class CenteredModel {
 public:
  CenteredModel(Model model, double baseline) : model_(std::move(model)), baseline_(baseline) {}

  int dim() const { return model_.dim(); }
  double baseline() const { return baseline_; }
  const Model& inner() const { return model_; }

  Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const {
    return model_.evaluate(points).array() - baseline_;
  }
  double evaluate_one(const Eigen::VectorXd& point) const {
    return model_.evaluate_one(point) - baseline_;
  }

 private:
  Model model_;
  double baseline_;
};

// baseline = mean model output over the background sample.
CenteredModel center(const Model& model, const Dataset& background);
// Re-centering replaces the baseline with the mean of the underlying model,
// so center(center(m, B), B) == center(m, B).
CenteredModel center(const CenteredModel& model, const Dataset& background);

}  // namespace ishap
