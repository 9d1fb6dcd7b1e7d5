#pragma once

#include "family.hpp"

namespace czflow {

/// Finite combination f = sum_i c_i chi_{P_i} with every P_i a cylinder of
/// one dyadic family.  All integrals are exact: the nodes form a forest under
/// inclusion, so integrals reduce to inclusion-exclusion along the tree and
/// the product rule mu(P cap P') = mu_N(Q cap Q') |U cap U'|.
class SimpleFunction {
 public:
  struct Term {
    double coef;
    std::int64_t node;
  };

  SimpleFunction(const DyadicFamily* fam, std::vector<Term> terms);

  const DyadicFamily& family() const { return *fam_; }
  const std::vector<Term>& terms() const { return terms_; }

  double value_at(const GroupPoint& x) const;
  double sup_abs() const;

  /// ||f||_1 by the flat region decomposition.
  double norm1() const;
  /// ||f||_1 by recursive accumulation along the inclusion forest; must agree
  /// with norm1() to 1e-12 relative.
  double norm1_alt() const;

  /// Integrals over a cylinder with a cube base from the family's system.
  double integral_signed(const Cylinder& C) const;
  double integral_abs(const Cylinder& C) const;
  /// int_C |f - offset| dmu.
  double integral_abs_offset(const Cylinder& C, double offset) const;

 private:
  struct ArrNode {
    std::int64_t fam_node;       // family node id
    double coef = 0;             // merged coefficient of this node
    double value = 0;            // sum of coefficients of arrangement ancestors incl. self
    std::int64_t arr_parent = -1;
    std::vector<int> kids;       // maximal arrangement descendants
  };

  bool node_contains(std::int64_t outer, std::int64_t inner) const;
  double mu_cap(std::int64_t fam_node, const Cylinder& C) const;  // mu(node cap C)
  double rec_norm1(int idx, double acc) const;

  const DyadicFamily* fam_;
  std::vector<Term> terms_;      // merged, one per distinct node
  std::vector<ArrNode> arr_;
  std::vector<int> roots_;
};

/// Uniformly weighted random function: `nterms` distinct family nodes with
/// coefficients in [-2,-1/4] u [1/4,2].
SimpleFunction random_simple_function(const DyadicFamily& fam, int nterms, std::mt19937_64& rng);

}  // namespace czflow
