#ifndef TAXAGG_IO_HPP
#define TAXAGG_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "taxagg/bayes_net.hpp"
#include "taxagg/estimation.hpp"
#include "taxagg/eval_metrics.hpp"
#include "taxagg/score_sheet.hpp"
#include "taxagg/taxonomy.hpp"

namespace taxagg {

inline constexpr const char* kToolVersion = "0.1.0";

/// Metadata emitted as '#'-prefixed lines at the top of every output file.
/// No timestamps: identical runs must produce identical bytes.
struct MetaHeader {
  std::string command;
  std::string config_digest;
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

std::string format_meta_header(const MetaHeader& meta);

/// FNV-1a 64-bit over the canonical key=value listing of a config.
std::string config_digest(const std::map<std::string, std::string>& keyvals);

/// Floating-point formatting used for all file output: 9 significant digits.
std::string format_double(double v);

// --- taxonomy files: one `child<TAB>parent` edge per line -----------------

std::vector<Edge> load_taxonomy_edges(const std::string& path);
Taxonomy load_taxonomy(const std::string& path);
void save_taxonomy(std::ostream& os, const Taxonomy& t, const MetaHeader& meta);
void save_taxonomy(const std::string& path, const Taxonomy& t, const MetaHeader& meta);

// --- score sheets: `instance<TAB>classifier<TAB>class<TAB>score` ----------

std::vector<ScoreSheet> load_sheets(const std::string& path, const Taxonomy* validate = nullptr);
void save_sheets(std::ostream& os, const std::vector<ScoreSheet>& sheets, const MetaHeader& meta);
void save_sheets(const std::string& path, const std::vector<ScoreSheet>& sheets,
                 const MetaHeader& meta);

// --- gold labels: `instance<TAB>class`, repeats allowed for multi-label ---

std::map<std::string, std::vector<ClassId>> load_gold(const std::string& path,
                                                      const Taxonomy* validate = nullptr);
void save_gold(const std::string& path, const std::map<std::string, ClassId>& golds,
               const MetaHeader& meta);

// --- observation parameters ------------------------------------------------
// `classifier<TAB>class<TAB>binormal<TAB>mu0<TAB>sigma0<TAB>mu1<TAB>sigma1[<TAB>fallback]`
// `classifier<TAB>class<TAB>discrete<TAB>alpha<TAB>beta[<TAB>fallback]`

std::vector<ObservationParams> load_params(const std::string& path,
                                           const Taxonomy* validate = nullptr);
void save_params(std::ostream& os, const std::vector<ObservationParams>& params,
                 const MetaHeader& meta);
void save_params(const std::string& path, const std::vector<ObservationParams>& params,
                 const MetaHeader& meta);

// --- entry-level class set: one class per line -----------------------------

std::set<ClassId> load_entry_set(const std::string& path, const Taxonomy* validate = nullptr);

// --- per-class prior weights: `class<TAB>weight`, weights > 0 --------------

std::map<ClassId, double> load_weights(const std::string& path);

// --- predictions (same shape as gold) and evaluation reports ---------------

void save_predictions(const std::string& path, const std::map<std::string, ClassId>& predictions,
                      const MetaHeader& meta);

/// CSV: header, one row per instance, then mean and stddev summary rows.
/// Fixed 6-decimal formatting.
void save_eval_report(std::ostream& os, const EvalReport& report, const MetaHeader& meta);
void save_eval_report(const std::string& path, const EvalReport& report, const MetaHeader& meta);

// --- soft labels and likelihood traces -------------------------------------

void save_soft_labels(const std::string& path, const SoftLabels& labels, const MetaHeader& meta);
void save_trace(const std::string& path, const std::vector<double>& log_likelihood,
                const MetaHeader& meta);

}  // namespace taxagg

#endif
