#pragma once

#include <chrono>

namespace rmu {

// Injectable time source: benchmark traces run against wall time, tests and
// reproducible campaigns against a fake that advances deterministically.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now_seconds() = 0;
};

class WallClock final : public Clock {
 public:
  double now_seconds() override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }

  static double resolution_seconds() {
    return static_cast<double>(std::chrono::steady_clock::period::num) /
           static_cast<double>(std::chrono::steady_clock::period::den);
  }
};

// Advances a fixed quantum per reading. The solver loop reads the clock twice
// per iteration (before and after the step), so every iteration costs exactly
// one quantum of virtual time; callers pick the quantum to model a per-step
// cost, e.g. from a FLOP count.
class DeterministicClock final : public Clock {
 public:
  explicit DeterministicClock(double seconds_per_call) : quantum_(seconds_per_call) {}

  double now_seconds() override { return quantum_ * static_cast<double>(calls_++); }

 private:
  double quantum_;
  long long calls_ = 0;
};

}  // namespace rmu
