#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlerode/deviation.hpp"
#include "stlerode/evaluate.hpp"
#include "stlerode/formula.hpp"
#include "stlerode/geometry.hpp"

namespace stlerode {

// Formula-level erosion: every predicate region is chipped inward by the
// deviation set's shadow on that predicate's plane; operators are untouched.
// Negated occurrences erode their complement, so their table entry is the
// dilated base region looked up under a distinct "name!" key with the flag
// kept. Empty erosions stay in the table as EmptyRegion (satisfaction through
// that leaf is impossible, which is the sound direction).
struct ErodedSpec {
  Formula original;
  Formula eroded;
  PredicateTable eroded_table;
  DeviationSet deviation;
  double theta = 0.0;
  std::map<std::string, double> planar_radii;  // erosion radius per eroded key
  std::vector<std::string> empty_predicates;   // eroded keys that came out empty
};

namespace detail {

inline void require_nnf(const Formula& f) {
  if (f->kind == NodeKind::Not) {
    throw std::invalid_argument("erosion requires negation-free input; run to_nnf first");
  }
  if (f->left) require_nnf(f->left);
  if (f->right) require_nnf(f->right);
}

inline Formula erode_walk(const Formula& f, const PredicateTable& table, const DeviationSet& dev,
                          ErodedSpec& spec) {
  switch (f->kind) {
    case NodeKind::True:
      return f;
    case NodeKind::Predicate: {
      const Region& base = lookup(table, f->name);
      std::string key = f->negated ? f->name + "!" : f->name;
      double rho = planar_radius(dev, base.coords);
      auto it = spec.eroded_table.find(key);
      if (it == spec.eroded_table.end()) {
        ErodedShape es = erode_predicate_shape(base.shape, f->negated, rho);
        Region region{es.shape, base.coords};
        spec.eroded_table.emplace(key, region);
        spec.planar_radii[key] = rho;
        if (es.empty) spec.empty_predicates.push_back(key);
      }
      bool empty = std::holds_alternative<EmptyRegion>(spec.eroded_table.at(key).shape);
      // An empty erosion is a plain unsatisfiable predicate regardless of the
      // original polarity.
      return FormulaNode::predicate(key, empty ? false : f->negated);
    }
    case NodeKind::And:
      return FormulaNode::conj(erode_walk(f->left, table, dev, spec),
                               erode_walk(f->right, table, dev, spec));
    case NodeKind::Or:
      return FormulaNode::disj(erode_walk(f->left, table, dev, spec),
                               erode_walk(f->right, table, dev, spec));
    case NodeKind::Until:
      return FormulaNode::until(erode_walk(f->left, table, dev, spec),
                                erode_walk(f->right, table, dev, spec), f->t1, f->t2);
    case NodeKind::Eventually:
      return FormulaNode::eventually(erode_walk(f->left, table, dev, spec), f->t1, f->t2);
    case NodeKind::Globally:
      return FormulaNode::globally(erode_walk(f->left, table, dev, spec), f->t1, f->t2);
    case NodeKind::Not:
      break;
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

inline ErodedSpec erode_formula(const Formula& f, const PredicateTable& table,
                                const DeviationSet& dev) {
  detail::require_nnf(f);
  ErodedSpec spec;
  spec.original = f;
  spec.deviation = dev;
  spec.eroded = detail::erode_walk(f, table, dev, spec);
  return spec;
}

}  // namespace stlerode
