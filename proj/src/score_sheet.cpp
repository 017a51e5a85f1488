#include "taxagg/score_sheet.hpp"

#include <cmath>

#include "taxagg/errors.hpp"

namespace taxagg {

void validate_sheet(const Taxonomy& t, const ScoreSheet& sheet) {
  for (const auto& [classifier, class_scores] : sheet.scores) {
    for (const auto& [class_id, score] : class_scores) {
      if (!t.contains(class_id)) {
        throw UnknownClassError(class_id + " (instance " + sheet.instance_id + ", classifier " +
                                classifier + ")");
      }
      if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
        throw InvalidScoreError("score " + std::to_string(score) + " outside [0,1] for instance " +
                                sheet.instance_id + ", classifier " + classifier + ", class " +
                                class_id);
      }
    }
  }
}

}  // namespace taxagg
