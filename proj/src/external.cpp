#include "ishap/external.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "ishap/errors.hpp"

namespace ishap {

namespace {

// A dead child must surface as a read error, not a SIGPIPE kill.
void ignore_sigpipe_once() {
  static const bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

[[noreturn]] void child_exec(const std::string& cmd, const std::vector<std::string>& args,
                             int in_fd, int out_fd) {
  ::dup2(in_fd, STDIN_FILENO);
  ::dup2(out_fd, STDOUT_FILENO);
  ::close(in_fd);
  ::close(out_fd);
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(cmd.c_str()));
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  ::execvp(cmd.c_str(), argv.data());
  ::_exit(127);
}

}  // namespace

ExternalPredictor::ExternalPredictor(const std::string& cmd, const std::vector<std::string>& args) {
  ignore_sigpipe_once();
  label_ = cmd;
  int to_pipe[2];
  int from_pipe[2];
  if (::pipe(to_pipe) != 0) throw ProtocolError(label_ + ": pipe failed: " + std::strerror(errno));
  if (::pipe(from_pipe) != 0) {
    ::close(to_pipe[0]);
    ::close(to_pipe[1]);
    throw ProtocolError(label_ + ": pipe failed: " + std::strerror(errno));
  }
  pid_ = ::fork();
  if (pid_ < 0) throw ProtocolError(label_ + ": fork failed: " + std::strerror(errno));
  if (pid_ == 0) {
    ::close(to_pipe[1]);
    ::close(from_pipe[0]);
    child_exec(cmd, args, to_pipe[0], from_pipe[1]);
  }
  ::close(to_pipe[0]);
  ::close(from_pipe[1]);
  to_child_ = ::fdopen(to_pipe[1], "w");
  from_child_ = ::fdopen(from_pipe[0], "r");
  if (!to_child_ || !from_child_) {
    shutdown();
    throw ProtocolError(label_ + ": fdopen failed");
  }
}

ExternalPredictor::~ExternalPredictor() { shutdown(); }

void ExternalPredictor::shutdown() noexcept {
  if (to_child_) {
    std::fclose(to_child_);  // EOF tells the child to exit
    to_child_ = nullptr;
  }
  if (from_child_) {
    std::fclose(from_child_);
    from_child_ = nullptr;
  }
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

Eigen::VectorXd ExternalPredictor::predict(const Eigen::MatrixXd& points) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!to_child_ || !from_child_) throw ProtocolError(label_ + ": predictor already shut down");
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();

  std::fprintf(to_child_, "predict %lld\n", static_cast<long long>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j)
      std::fprintf(to_child_, j ? ",%.17g" : "%.17g", points(i, j));
    std::fputc('\n', to_child_);
  }
  if (std::fflush(to_child_) != 0)
    throw ProtocolError(label_ + ": write failed (child gone?): " + std::strerror(errno));

  Eigen::VectorXd out(n);
  char* line = nullptr;
  std::size_t cap = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ssize_t len = ::getline(&line, &cap, from_child_);
    if (len < 0) {
      std::free(line);
      int status = 0;
      std::ostringstream msg;
      msg << label_ << ": reply ended after " << i << " of " << n << " lines";
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        if (WIFEXITED(status)) msg << " (child exited with status " << WEXITSTATUS(status) << ")";
        pid_ = -1;
      }
      throw ProtocolError(msg.str());
    }
    while (len > 0 && (line[len - 1] == '\n' || line[len - 1] == '\r')) line[--len] = '\0';
    char* end = nullptr;
    double v = std::strtod(line, &end);
    while (end && *end == ' ') ++end;
    if (end == line || (end && *end != '\0')) {
      std::string bad(line);
      std::free(line);
      throw ProtocolError(label_ + ": malformed reply line: '" + bad + "'");
    }
    out[i] = v;
  }
  std::free(line);
  return out;
}

}  // namespace ishap
