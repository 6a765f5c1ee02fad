#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace aoimec {

// (age at monitor, elapsed service slots of the in-flight update).
struct State {
  int a = 1;
  int z = 0;

  friend bool operator==(const State&, const State&) = default;
};

enum class Action : std::uint8_t { local = 0, mec = 1 };

inline int to_int(Action u) { return static_cast<int>(u); }

struct ModelParams {
  double mu = 0.5;      // local per-slot completion probability
  double lambda = 0.0;  // price of one MEC use
  double beta = 0.99;   // discount factor, only used by discounted value iteration
  int a_max = 50;       // age truncation level

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Default truncation: slow local servers need room for ages of order 1/mu.
int default_a_max(double mu);

struct Transition {
  State next;
  double prob = 0.0;
};

// At most two successors; `size` of them are valid.
struct Transitions {
  std::array<Transition, 2> items{};
  std::size_t size = 0;

  std::span<const Transition> view() const { return {items.data(), size}; }
  auto begin() const { return view().begin(); }
  auto end() const { return view().end(); }
};

void check_state(State s);
void check_mu(double mu);

// One-slot kernel. Truncation is not applied here; callers decide what happens at a_max.
Transitions transitions(State s, Action u, double mu);

// Per-slot cost: a + 1/2 + lambda * u.
double cost(State s, Action u, double lambda);

// Triangular enumeration of the truncated space {(a, z) : 1 <= a <= a_max, 0 <= z < a},
// row-major in a.
class StateSpace {
 public:
  explicit StateSpace(int a_max);

  int a_max() const { return a_max_; }
  std::size_t size() const { return size_; }

  bool contains(State s) const { return s.a >= 1 && s.a <= a_max_ && s.z >= 0 && s.z < s.a; }

  static constexpr std::size_t index_of(int a, int z) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(a - 1) / 2 + static_cast<std::size_t>(z);
  }
  std::size_t index(State s) const;
  State state(std::size_t index) const;

 private:
  int a_max_;
  std::size_t size_;
};

std::string to_string(State s);

}  // namespace aoimec
