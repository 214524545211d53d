#pragma once

namespace fedcl {

/// Process CPU time (user + system) in seconds.
double process_cpu_seconds();

/// CPU seconds consumed since construction or the last restart().
class CpuTimer {
 public:
  CpuTimer() : start_(process_cpu_seconds()) {}
  void restart() { start_ = process_cpu_seconds(); }
  double elapsed() const { return process_cpu_seconds() - start_; }

 private:
  double start_;
};

}  // namespace fedcl
