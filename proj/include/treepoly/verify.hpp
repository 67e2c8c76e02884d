#pragma once

#include "treepoly/report.hpp"

namespace treepoly::oracle {

struct VerifyOptions {
  int seeds = 20;
  int max_n = 10;     // engine/naive comparison depth
  int exact_n = 3;    // deepest exhaustive expectation
  unsigned threads = 1;
};

/// Every brute-force cross-check: walk counts, engine against direct
/// summation, exhaustive expectations against closed forms, the root/forward
/// decomposition, critical points of the Gaussian and endpoint anchors of r.
ExperimentReport run_verification(const VerifyOptions& options = {});

}  // namespace treepoly::oracle
