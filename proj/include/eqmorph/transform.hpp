#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqmorph/algebra.hpp"
#include "eqmorph/rng.hpp"

namespace eqmorph {

enum class PairingMode { SeedVsMutant, MutantVsMutant };

/// What rules may consult besides the tree: the schema, optionally the live
/// database (constants for inserted predicates) and a random source.
struct RuleContext {
  const Schema* schema = nullptr;
  const Database* database = nullptr;
  Rng* rng = nullptr;
};

struct RewriteRule {
  std::string name;
  PairingMode pairing = PairingMode::SeedVsMutant;
  /// Pattern plus side condition at one node; `root` is the whole tree.
  std::function<bool(const AlgebraExpr& root, const NodePath& site)> matches;
  /// Replacement subtrees for the matched node. SeedVsMutant rules return
  /// one; MutantVsMutant rules return one (two renderings of it) or two.
  std::function<std::vector<AlgebraExpr>(const AlgebraExpr& node, const RuleContext& ctx)> build;
};

using Catalog = std::vector<RewriteRule>;

/// All seven shipped rules in fixed order.
const Catalog& default_catalog();
/// Only the four tree-rewrite rules (projection pull up, commutative
/// selections, cascade of projection, commutative set union).
Catalog basic_catalog();
/// Subset of `catalog` by rule name. Throws std::invalid_argument on an
/// unknown name.
Catalog select_rules(const Catalog& catalog, const std::vector<std::string>& names);
std::vector<std::string> rule_names(const Catalog& catalog);

struct RuleMatch {
  std::size_t rule = 0;  // index into the catalog
  NodePath site;
};

/// Matches in catalog order, then leftmost-innermost (post-order) site.
std::vector<RuleMatch> applicable_rules(const AlgebraExpr& e, const Catalog& catalog);

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies one match; returns the first replacement spliced into `e`. Throws
/// RuleError if the rule no longer matches at `site`.
AlgebraExpr apply_rule(const RewriteRule& rule, const AlgebraExpr& e, const NodePath& site,
                       const RuleContext& ctx = {});

struct EquivalentQueryPair {
  SqlQuery left;
  SqlQuery right;
  std::string ruleName;
  std::string seedText;
  PairingMode pairing = PairingMode::SeedVsMutant;
};

enum class RuleOrder { FirstMatch, Shuffled };

/// parse → lower → first applicable rule yielding a valid pair → remap.
/// With RuleOrder::Shuffled the rule order is drawn from ctx.rng. Returns
/// nullopt when no rule applies. `seed` must validate against ctx.schema.
std::optional<EquivalentQueryPair> transform_query(const SqlQuery& seed, const Catalog& catalog,
                                                   const RuleContext& ctx,
                                                   RuleOrder order = RuleOrder::FirstMatch);

/// Up to `k` distinct single-step rewrites of `e` that typecheck and remap.
std::vector<AlgebraExpr> enumerate_mutants(const AlgebraExpr& e, const Catalog& catalog, std::size_t k,
                                           const RuleContext& ctx = {});

}  // namespace eqmorph
