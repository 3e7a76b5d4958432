#include "shearsep/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace shearsep {

const GaussRule& gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be >= 1");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;

  auto rule = std::make_unique<GaussRule>();
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<size_t>(n));
  if (table == nullptr) throw std::runtime_error("gauss_rule: table allocation failed");
  rule->nodes.resize(n);
  rule->weights.resize(n);
  for (int i = 0; i < n; ++i) {
    gsl_integration_glfixed_point(0.0, 1.0, static_cast<size_t>(i), &rule->nodes[i], &rule->weights[i], table);
  }
  gsl_integration_glfixed_table_free(table);
  return *cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace shearsep
