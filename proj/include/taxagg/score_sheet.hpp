#ifndef TAXAGG_SCORE_SHEET_HPP
#define TAXAGG_SCORE_SHEET_HPP

#include <map>
#include <string>

#include "taxagg/taxonomy.hpp"

namespace taxagg {

/// Per-instance classifier outputs: classifier id -> class -> probability.
/// Ordered maps keep aggregation order canonical regardless of how the
/// sheet was assembled.
struct ScoreSheet {
  std::string instance_id;
  std::map<std::string, std::map<ClassId, double>> scores;

  friend bool operator==(const ScoreSheet& a, const ScoreSheet& b) {
    return a.instance_id == b.instance_id && a.scores == b.scores;
  }
};

/// Checks scores lie in [0,1] and every class exists in the taxonomy.
/// Unknown classes are a hard error: dropping them silently would corrupt
/// aggregate mass.
void validate_sheet(const Taxonomy& t, const ScoreSheet& sheet);

}  // namespace taxagg

#endif
