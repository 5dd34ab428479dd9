#pragma once

#include <stdexcept>

namespace critperc {

/// A postcondition failed on valid input; indicates a bug rather than bad data.
class InternalInconsistency : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace critperc
