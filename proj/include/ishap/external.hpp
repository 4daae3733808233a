#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <mutex>
#include <string>
#include <sys/types.h>
#include <vector>

namespace ishap {

// Line-protocol client for an external predictor subprocess.
//
// Per exchange the engine writes
//   predict <n>\n
//   <x_1,...,x_d>\n          (n lines, comma separated, printf %.17g)
// and the child answers with n lines, one decimal float each. The child stays
// alive across exchanges and exits when the engine closes its stdin.
//
// Exchanges are serialized through a lock, so a shared client is safe to call
// from several threads. Any deviation (spawn failure, short or malformed
// reply, child death observed as early EOF) raises ProtocolError.
class ExternalPredictor {
 public:
  ExternalPredictor(const std::string& cmd, const std::vector<std::string>& args);
  ~ExternalPredictor();

  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  Eigen::VectorXd predict(const Eigen::MatrixXd& points);

 private:
  void shutdown() noexcept;

  std::mutex mutex_;
  pid_t pid_ = -1;
  FILE* to_child_ = nullptr;
  FILE* from_child_ = nullptr;
  std::string label_;
};

}  // namespace ishap
