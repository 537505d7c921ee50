#pragma once

#include "smoothot/measures.hpp"

namespace testpairs {

using smoothot::Atom;
using smoothot::DiscreteMeasure;

// 1/2 delta_{-1} + 1/2 delta_{+1}
inline DiscreteMeasure symmetric_two_point() {
  return DiscreteMeasure(1, {Atom{{-1.0}, 0.5}, Atom{{1.0}, 0.5}});
}

inline DiscreteMeasure origin(std::size_t dim = 1) {
  return DiscreteMeasure::dirac(smoothot::Point(dim, 0.0));
}

// {-1: 2/3, 2: 1/3} and its mirror image; mean and variance agree, third moments differ.
inline DiscreteMeasure skewed_left() {
  return DiscreteMeasure(1, {Atom{{-1.0}, 2.0 / 3.0}, Atom{{2.0}, 1.0 / 3.0}});
}
inline DiscreteMeasure skewed_right() {
  return DiscreteMeasure(1, {Atom{{1.0}, 2.0 / 3.0}, Atom{{-2.0}, 1.0 / 3.0}});
}

inline DiscreteMeasure unit_dirac() { return DiscreteMeasure::dirac({1.0}); }

inline DiscreteMeasure planar_two_point() {
  return DiscreteMeasure(2, {Atom{{-1.0, 0.0}, 0.5}, Atom{{1.0, 0.0}, 0.5}});
}

}  // namespace testpairs
