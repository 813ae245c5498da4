#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

namespace reachlab {

//! Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class PaddingError : public Error {
public:
  using Error::Error;
};

class GeometryMismatch : public Error {
public:
  using Error::Error;
};

class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

//! A parallel set that came out empty; carries the offset that collapsed it.
class DegenerateSet : public Error {
public:
  explicit DegenerateSet(double s)
      : Error("parallel set at s = " + std::to_string(s) + " is trivial"), s_(s) {}
  double offset() const { return s_; }

private:
  double s_;
};

class NotGraphError : public Error {
public:
  using Error::Error;
};

using Point = std::array<double, 3>;

inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Point operator*(double k, const Point& a) { return {k * a[0], k * a[1], k * a[2]}; }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Point normalized(const Point& a) { return (1.0 / norm(a)) * a; }

//! Volume of the unit ball in dimension n (n = 0..3).
inline double unit_ball_volume(int n) {
  switch (n) {
  case 0: return 1.0;
  case 1: return 2.0;
  case 2: return std::numbers::pi;
  case 3: return 4.0 * std::numbers::pi / 3.0;
  default: throw InvalidArgument("unit_ball_volume: dimension must be 0..3");
  }
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

//! Neumaier compensated sum; order of the input fixes the result.
class CompensatedSum {
public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Shortest round-trip decimal for a double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, std::size_t line) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw FormatError("expected a number, got '" + s + "'", line);
  return x;
}

// ---- threading -----------------------------------------------------------

namespace detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> value{0};
  return value;
}
inline bool& in_worker() {
  thread_local bool inside = false;
  return inside;
}
} // namespace detail

//! Worker count: explicit override, else REACHLAB_THREADS, else hardware.
inline int thread_count() {
  int forced = detail::thread_override().load();
  if (forced > 0) return forced;
  if (const char* env = std::getenv("REACHLAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

//! Pins the worker count for the lifetime of the object (tests use this).
class ScopedThreadCount {
public:
  explicit ScopedThreadCount(int n) : previous_(detail::thread_override().exchange(n)) {}
  ~ScopedThreadCount() { detail::thread_override().store(previous_); }
  ScopedThreadCount(const ScopedThreadCount&) = delete;
  ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

private:
  int previous_;
};

// Static contiguous chunking: every index is handled exactly once and writes
// only its own outputs, so results do not depend on the worker count.
template <class F>
void parallel_for(std::int64_t count, F&& fn) {
  if (count <= 0) return;
  std::int64_t workers = detail::in_worker() ? 1 : std::min<std::int64_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run_chunk = [&](std::int64_t w) {
    std::int64_t lo = count * w / workers, hi = count * (w + 1) / workers;
    bool was_inside = detail::in_worker();
    detail::in_worker() = true; // nested loops run serially
    try {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
    detail::in_worker() = was_inside;
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::int64_t w = 1; w < workers; ++w) pool.emplace_back(run_chunk, w);
  run_chunk(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace reachlab
