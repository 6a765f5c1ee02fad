#include "core.hpp"

#include <cmath>

namespace aoimec {

void check_mu(double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("mu must lie in (0, 1], got " + std::to_string(mu));
}

void ModelParams::validate() const {
  check_mu(mu);
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be a finite non-negative number, got " + std::to_string(lambda));
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1), got " + std::to_string(beta));
  if (a_max < 2) throw std::invalid_argument("a_max must be at least 2, got " + std::to_string(a_max));
}

int default_a_max(double mu) { return mu >= 0.1 ? 50 : 400; }

void check_state(State s) {
  if (s.a < 1 || s.z < 0) throw std::invalid_argument("invalid state " + to_string(s));
}

Transitions transitions(State s, Action u, double mu) {
  check_state(s);
  check_mu(mu);
  Transitions out;
  if (u == Action::mec) {
    out.items[0] = {{1, 0}, 1.0};
    out.size = 1;
    return out;
  }
  out.items[0] = {{s.z + 1, 0}, mu};
  out.size = 1;
  if (mu < 1.0) {
    out.items[1] = {{s.a + 1, s.z + 1}, 1.0 - mu};
    out.size = 2;
  }
  return out;
}

double cost(State s, Action u, double lambda) {
  return static_cast<double>(s.a) + 0.5 + (u == Action::mec ? lambda : 0.0);
}

StateSpace::StateSpace(int a_max) : a_max_(a_max) {
  if (a_max < 1) throw std::invalid_argument("a_max must be positive");
  size_ = index_of(a_max + 1, 0);
}

std::size_t StateSpace::index(State s) const {
  if (!contains(s)) throw std::out_of_range("state " + to_string(s) + " outside truncated space");
  return index_of(s.a, s.z);
}

State StateSpace::state(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("state index out of range");
  // Largest a with a(a-1)/2 <= index.
  auto a = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
  while (index_of(a, 0) > index) --a;
  while (index_of(a + 1, 0) <= index) ++a;
  return {a, static_cast<int>(index - index_of(a, 0))};
}

std::string to_string(State s) { return "(" + std::to_string(s.a) + "," + std::to_string(s.z) + ")"; }

}  // namespace aoimec
