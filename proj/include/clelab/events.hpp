#pragma once

#include "clelab/curves.hpp"
#include "clelab/sampler.hpp"

namespace clelab {

// Signed winding number of a closed polygonal curve about z. Simple loops
// give -1, 0 or +1. Throws when z lies on the curve.
int winding_number(const std::vector<Cplx>& loop, Cplx z);

// Closed annular set between two Jordan curves, the support of the
// loop-quenching events. The marked point witnesses the bounded complement
// component for the separation test.
struct AnnulusSpec {
  ClosedCurve outer;
  ClosedCurve inner;
  Cplx marked_inner_point;

  AnnulusSpec(ClosedCurve outer_, ClosedCurve inner_);

  bool in_open_annulus(Cplx z) const {
    return outer.contains(z) && !inner.contains_closed(z);
  }
  bool in_closed_annulus(Cplx z) const {
    return outer.contains_closed(z) && !inner.contains(z);
  }
  // Smallest gap between the two curves (sampled).
  double min_width() const;
};

// Declarative loop events with explicit support tracking.
class EventSpec {
 public:
  enum class Kind { WindingLoopIn, Separation, SurroundPair, Sure };

  // At least one loop lies in the open annulus and separates its
  // complement components (winding +-1 about the marked point).
  static EventSpec winding_loop_in(AnnulusSpec annulus);
  // Some loop winds +-1 about every point of one group and 0 about every
  // point of the other (either orientation).
  static EventSpec separation(std::vector<Cplx> group1,
                              std::vector<Cplx> group2);
  // At least min_count loops wind about both points.
  static EventSpec surround_pair(Cplx z1, Cplx z2, int min_count = 1);
  static EventSpec sure();

  Kind kind() const { return kind_; }
  const AnnulusSpec& annulus() const;
  const std::vector<Cplx>& group1() const { return group1_; }
  const std::vector<Cplx>& group2() const { return group2_; }
  Cplx z1() const { return z1_; }
  Cplx z2() const { return z2_; }
  int min_count() const { return min_count_; }

  std::string describe() const;

  // True when the loop intersects the event support (the closed annulus,
  // the separation star, or the surround ray cut off at far_radius).
  bool loop_touches_support(const std::vector<Cplx>& loop,
                            double far_radius) const;

  EventSpec translated(Cplx t) const;

 private:
  EventSpec() = default;
  Kind kind_ = Kind::Sure;
  std::vector<AnnulusSpec> annulus_;  // 0 or 1 entry
  std::vector<Cplx> group1_, group2_;
  Cplx z1_{0.0, 0.0}, z2_{0.0, 0.0};
  int min_count_ = 1;
};

bool eval_event(const EventSpec& e, const LoopsView& loops);
// SurroundPair: the loop count; other kinds: the indicator as 0/1.
double eval_count(const EventSpec& e, const LoopsView& loops);

// k times the number of loops surrounding both points.
double pair_loop_count(const LoopsView& loops, Cplx z1, Cplx z2, double k);

// Event that a loop is quenched in the annulus between the ellipse (b) and
// its regularization partner ((1-eta) b).
EventSpec regularized_ellipse_event(Cplx w, double eps, double theta, double b,
                                    double eta);

// Validates the eval_event preconditions: geometry inside the region with
// margin >= 2 spacing, annuli at least 3 spacings wide. Throws with the
// violated requirement spelled out.
void check_event_fits(const EventSpec& e, const HexLattice& lat);

// check_event_fits + wrap as a chain observable (indicator / count).
Observable event_observable(const EventSpec& e, const HexLattice& lat,
                            bool as_count = false);

}  // namespace clelab
